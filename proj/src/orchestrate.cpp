#include "hetmc/orchestrate.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "hetmc/errors.hpp"

namespace hetmc {

using nlohmann::ordered_json;

ModelSet fit_models(const Portfolio& portfolio, const PlatformRegistry& registry,
                    const RunOptions& options) {
  validate_portfolio(portfolio);
  validate_registry(registry);

  ModelSet models;
  for (const auto& p : registry.platforms) models.platform_names.push_back(p.name);
  for (const auto& t : portfolio.tasks) models.task_ids.push_back(t.id);
  models.latency.resize(registry.platforms.size());
  models.confidence.resize(portfolio.tasks.size());

  for (std::size_t p = 0; p < registry.platforms.size(); ++p) {
    for (std::size_t t = 0; t < portfolio.tasks.size(); ++t) {
      const auto obs = benchmark(registry.platforms[p], portfolio.tasks[t],
                                 options.benchmark_sizes, options.chunk_size);
      models.latency[p].push_back(fit_latency(obs));
      if (p == 0) {
        // Moment sums are platform-invariant, so one confidence fit per
        // task suffices; take the largest (most stable) observation.
        const auto largest = std::max_element(
            obs.begin(), obs.end(),
            [](const BenchmarkObservation& a, const BenchmarkObservation& b) {
              return a.n < b.n;
            });
        models.confidence[t] = fit_confidence(*largest);
      }
    }
  }
  models.validate();
  return models;
}

namespace {

struct Shard {
  std::size_t platform;
  std::size_t task;
  std::uint64_t first_chunk;
  std::uint64_t n_chunks;
  std::uint64_t n_paths;
};

}  // namespace

RunReport run(const Portfolio& portfolio, const PlatformRegistry& registry,
              const TargetVector& targets, const RunOptions& options) {
  return run_with_models(portfolio, registry, targets,
                         fit_models(portfolio, registry, options), options);
}

RunReport run_with_models(const Portfolio& portfolio, const PlatformRegistry& registry,
                          const TargetVector& targets, const ModelSet& models,
                          const RunOptions& options) {
  if (options.chunk_size == 0) throw ValidationError("run: chunk_size must be >= 1");
  for (std::size_t t = 0; t < portfolio.tasks.size(); ++t) {
    if (t >= models.task_ids.size() || models.task_ids[t] != portfolio.tasks[t].id) {
      throw ValidationError("run: models do not match the portfolio's task order");
    }
  }
  for (std::size_t p = 0; p < registry.platforms.size(); ++p) {
    if (p >= models.platform_names.size() ||
        models.platform_names[p] != registry.platforms[p].name) {
      throw ValidationError("run: models do not match the registry's platform order");
    }
  }

  RunReport report;
  report.chunk_size = options.chunk_size;
  report.models = models;

  const CostBuild build = build_cost_matrix(report.models, targets);
  report.allocation = optimize(report.models, build.path_demands);
  report.allocation.validate();

  const std::size_t P = registry.platforms.size();
  const std::size_t T = portfolio.tasks.size();

  // Round every shard up to whole chunks and hand out disjoint, contiguous
  // chunk ranges per task, in platform order.
  std::vector<std::vector<Shard>> shards_by_platform(P);
  for (std::size_t t = 0; t < T; ++t) {
    std::uint64_t cursor = 0;
    for (std::size_t p = 0; p < P; ++p) {
      const double fraction = report.allocation.a[p][t];
      if (fraction <= 0.0) continue;
      const double want = fraction * static_cast<double>(build.path_demands[t]);
      const std::uint64_t n_chunks = std::max<std::uint64_t>(
          1, static_cast<std::uint64_t>(
                 std::ceil(want / static_cast<double>(options.chunk_size))));
      shards_by_platform[p].push_back(
          {p, t, cursor, n_chunks, n_chunks * options.chunk_size});
      cursor += n_chunks;
    }
  }

  // One executor per platform; each platform works through its own shard
  // queue sequentially while platforms run concurrently.
  std::vector<std::vector<PartialResult>> results(P);
  {
    std::vector<std::thread> executors;
    executors.reserve(P);
    for (std::size_t p = 0; p < P; ++p) {
      results[p].resize(shards_by_platform[p].size());
      executors.emplace_back([&, p] {
        for (std::size_t i = 0; i < shards_by_platform[p].size(); ++i) {
          const Shard& s = shards_by_platform[p][i];
          results[p][i] = execute(registry.platforms[p], portfolio.tasks[s.task],
                                  s.n_paths, s.first_chunk, options.chunk_size);
        }
      });
    }
    for (auto& e : executors) e.join();
  }

  report.platform_names = report.models.platform_names;
  report.platform_latency_s.assign(P, 0.0);
  for (std::size_t p = 0; p < P; ++p) {
    for (const auto& r : results[p]) report.platform_latency_s[p] += r.elapsed_s();
  }

  // Merge per task; the chunk-keyed union makes the fold order irrelevant.
  for (std::size_t t = 0; t < T; ++t) {
    PartialResult merged;
    TaskReport tr;
    tr.id = portfolio.tasks[t].id;
    tr.ci_target = targets.ci_targets[t];
    tr.path_demand = build.path_demands[t];
    for (std::size_t p = 0; p < P; ++p) {
      for (std::size_t i = 0; i < shards_by_platform[p].size(); ++i) {
        const Shard& s = shards_by_platform[p][i];
        if (s.task != t) continue;
        merged = merge(merged, results[p][i]);
        tr.shards.push_back({registry.platforms[p].name, s.n_paths, s.n_chunks,
                             results[p][i].elapsed_s(),
                             registry.platforms[p].is_simulated()});
      }
    }
    const Estimate est = estimate(merged);
    tr.price = est.price;
    tr.std_error = est.std_error;
    tr.ci_half_width = est.ci_half_width;
    tr.paths_total = est.n;
    report.tasks.push_back(std::move(tr));
  }

  bool any_wall = false, any_virtual = false;
  double wall_max = 0.0, virtual_max = 0.0;
  for (std::size_t p = 0; p < P; ++p) {
    if (registry.platforms[p].is_simulated()) {
      any_virtual = true;
      virtual_max = std::max(virtual_max, report.platform_latency_s[p]);
    } else {
      any_wall = true;
      wall_max = std::max(wall_max, report.platform_latency_s[p]);
    }
  }
  if (any_wall && any_virtual) {
    report.clock_domain = "mixed";
    report.wall_makespan_s = wall_max;
    report.virtual_makespan_s = virtual_max;
    report.makespan_s = std::max(wall_max, virtual_max);
  } else {
    report.clock_domain = any_virtual ? "virtual" : "wall";
    report.makespan_s = std::max(wall_max, virtual_max);
    report.wall_makespan_s = wall_max;
    report.virtual_makespan_s = virtual_max;
  }
  return report;
}

TargetVector select_by_index(const std::vector<FrontierPoint>& points,
                             std::size_t index) {
  if (points.empty()) throw ValidationError("select: empty frontier");
  if (index >= points.size()) {
    throw ValidationError("select: index " + std::to_string(index) +
                          " out of range (frontier has " +
                          std::to_string(points.size()) + " points)");
  }
  return points[index].targets;
}

TargetVector select_by_latency_bound(const std::vector<FrontierPoint>& points,
                                     double max_latency_s) {
  if (points.empty()) throw ValidationError("select: empty frontier");
  // Points are sorted tightest (slowest) first; the first point under the
  // bound is the tightest feasible one.
  for (const auto& pt : points) {
    if (pt.makespan_s <= max_latency_s) return pt.targets;
  }
  throw InfeasibleError("select: no frontier point has makespan <= " +
                        std::to_string(max_latency_s) + " s");
}

ordered_json models_to_json(const ModelSet& models) {
  ordered_json out = ordered_json::array();
  for (std::size_t t = 0; t < models.task_count(); ++t) {
    ordered_json jt;
    jt["task_id"] = models.task_ids[t];
    jt["confidence"] = ordered_json{{"k", models.confidence[t].k}};
    ordered_json lat = ordered_json::array();
    for (std::size_t p = 0; p < models.platform_count(); ++p) {
      lat.push_back(ordered_json{{"platform", models.platform_names[p]},
                                 {"setup_s", models.latency[p][t].setup_s},
                                 {"rate", models.latency[p][t].rate}});
    }
    jt["latency"] = std::move(lat);
    out.push_back(std::move(jt));
  }
  return out;
}

ordered_json allocation_to_json(const AllocationMatrix& alloc, const ModelSet& models) {
  ordered_json out;
  for (std::size_t p = 0; p < models.platform_count(); ++p) {
    ordered_json row;
    for (std::size_t t = 0; t < models.task_count(); ++t) {
      row[models.task_ids[t]] = alloc.a[p][t];
    }
    out[models.platform_names[p]] = std::move(row);
  }
  return out;
}

ordered_json report_to_json(const RunReport& report) {
  ordered_json out;
  out["tasks"] = ordered_json::array();
  for (const auto& t : report.tasks) {
    ordered_json jt;
    jt["id"] = t.id;
    jt["price"] = t.price;
    jt["std_error"] = t.std_error;
    jt["ci_half_width"] = t.ci_half_width;
    jt["ci_target"] = t.ci_target;
    jt["path_demand"] = t.path_demand;
    jt["paths_total"] = t.paths_total;
    jt["platforms"] = ordered_json::array();
    for (const auto& s : t.shards) {
      jt["platforms"].push_back(ordered_json{{"name", s.platform},
                                             {"paths", s.paths},
                                             {"chunks", s.chunks},
                                             {"latency_s", s.latency_s},
                                             {"virtual_clock", s.virtual_clock}});
    }
    out["tasks"].push_back(std::move(jt));
  }
  out["clock_domain"] = report.clock_domain;
  if (report.clock_domain == "mixed") {
    out["wall_makespan_s"] = report.wall_makespan_s;
    out["virtual_makespan_s"] = report.virtual_makespan_s;
  } else {
    out["makespan_s"] = report.makespan_s;
  }
  ordered_json platforms = ordered_json::array();
  for (std::size_t p = 0; p < report.platform_names.size(); ++p) {
    platforms.push_back(ordered_json{{"name", report.platform_names[p]},
                                     {"latency_s", report.platform_latency_s[p]}});
  }
  out["platforms"] = std::move(platforms);
  out["allocation"] = allocation_to_json(report.allocation, report.models);
  out["models"] = models_to_json(report.models);
  out["chunk_size"] = report.chunk_size;
  return out;
}

}  // namespace hetmc
