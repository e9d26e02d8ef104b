#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hetmc/allocate.hpp"
#include "hetmc/domain.hpp"
#include "hetmc/errors.hpp"
#include "hetmc/metrics.hpp"
#include "hetmc/orchestrate.hpp"
#include "hetmc/platform.hpp"

namespace {

using hetmc::ValidationError;
using nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Shortest round-trip decimal form, same as the JSON output uses.
std::string dump_double(double v) { return nlohmann::json(v).dump(); }

std::vector<double> parse_double_list(const std::string& s, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(item, &pos);
      if (pos != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ValidationError(flag + ": cannot parse '" + item + "' as a number");
    }
  }
  if (out.empty()) throw ValidationError(flag + ": empty list");
  return out;
}

std::vector<std::uint64_t> parse_count_list(const std::string& s,
                                            const std::string& flag) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      const std::uint64_t v = std::stoull(item, &pos);
      if (pos != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ValidationError(flag + ": cannot parse '" + item + "' as a count");
    }
  }
  if (out.empty()) throw ValidationError(flag + ": empty list");
  return out;
}

hetmc::Portfolio load_portfolio(const std::string& path,
                                const std::optional<std::uint64_t>& seed) {
  hetmc::Portfolio p = hetmc::parse_task_file(read_file(path));
  if (seed) {
    for (auto& task : p.tasks) task.base_seed = *seed;
  }
  return p;
}

hetmc::PlatformRegistry default_registry() {
  hetmc::PlatformRegistry reg;
  hetmc::LocalCpuSpec cpu;
  cpu.workers = std::max(1u, std::thread::hardware_concurrency());
  reg.platforms.push_back({"local", cpu});
  return reg;
}

/// A single value broadcasts to every task; otherwise one value per task.
hetmc::TargetVector targets_for(const std::vector<double>& values, std::size_t n_tasks,
                                const std::string& flag) {
  hetmc::TargetVector tv;
  if (values.size() == 1) {
    tv.ci_targets.assign(n_tasks, values[0]);
  } else if (values.size() == n_tasks) {
    tv.ci_targets = values;
  } else {
    throw ValidationError(flag + ": expected 1 or " + std::to_string(n_tasks) +
                          " values, got " + std::to_string(values.size()));
  }
  return tv;
}

void require_json_format(const std::string& format, const std::string& command) {
  if (format != "json") {
    throw ValidationError(command + ": only --format json is supported");
  }
}

std::string frontier_csv(const std::vector<hetmc::FrontierPoint>& points,
                         const hetmc::ModelSet& models) {
  std::ostringstream out;
  out << "ci_scale,makespan_s";
  for (const auto& platform : models.platform_names) {
    for (const auto& task : models.task_ids) {
      out << ",alloc_" << platform << "_" << task;
    }
  }
  out << "\n";
  for (const auto& pt : points) {
    out << dump_double(pt.targets.ci_targets[0]) << "," << dump_double(pt.makespan_s);
    for (std::size_t p = 0; p < models.platform_count(); ++p) {
      for (std::size_t t = 0; t < models.task_count(); ++t) {
        out << "," << dump_double(pt.alloc.a[p][t]);
      }
    }
    out << "\n";
  }
  return out.str();
}

ordered_json frontier_json(const std::vector<hetmc::FrontierPoint>& points,
                           const hetmc::ModelSet& models) {
  ordered_json out = ordered_json::array();
  for (const auto& pt : points) {
    ordered_json jp;
    jp["ci_scale"] = pt.targets.ci_targets[0];
    ordered_json targets;
    for (std::size_t t = 0; t < models.task_count(); ++t) {
      targets[models.task_ids[t]] = pt.targets.ci_targets[t];
    }
    jp["ci_targets"] = std::move(targets);
    jp["makespan_s"] = pt.makespan_s;
    jp["allocation"] = hetmc::allocation_to_json(pt.alloc, models);
    out.push_back(std::move(jp));
  }
  return out;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Monte Carlo option pricing across heterogeneous platforms"};
  app.require_subcommand(1);

  std::string task_path, platforms_path, platform_name, format = "json";
  std::string sizes_csv, targets_csv;
  std::optional<std::uint64_t> seed;
  std::uint64_t chunk_size = hetmc::kDefaultChunkSize;
  std::uint64_t n_paths = 0;
  std::optional<double> max_latency;

  auto add_common = [&](CLI::App* cmd, bool needs_platforms) {
    cmd->add_option("task", task_path, "task file (JSON)")->required();
    auto* popt = cmd->add_option("--platforms", platforms_path, "platform file (JSON)");
    if (needs_platforms) popt->required();
    cmd->add_option("--seed", seed, "override every task's base_seed");
    cmd->add_option("--chunk-size", chunk_size, "paths per chunk")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));
  };

  auto* price = app.add_subcommand("price", "price tasks directly on one platform");
  add_common(price, false);
  price->add_option("--platform", platform_name, "platform name (default: first)");
  price->add_option("--paths", n_paths, "number of paths")
      ->required()
      ->check(CLI::PositiveNumber);

  auto* bench = app.add_subcommand("bench", "run online benchmarks");
  add_common(bench, true);
  bench->add_option("--sizes", sizes_csv, "comma-separated benchmark sizes");

  auto* model = app.add_subcommand("model", "benchmark and dump fitted metric models");
  add_common(model, true);

  auto* front = app.add_subcommand("frontier", "emit the latency/confidence frontier");
  add_common(front, true);
  front->add_option("--ci-targets", targets_csv, "comma-separated ci targets")
      ->required();

  auto* part = app.add_subcommand("partition", "optimize the allocation only");
  add_common(part, true);
  part->add_option("--ci-target", targets_csv, "ci target (single value or per task)")
      ->required();

  auto* runc = app.add_subcommand("run", "full pipeline: benchmark, partition, execute");
  add_common(runc, true);
  runc->add_option("--ci-target", targets_csv, "ci target (single value or per task)");
  runc->add_option("--max-latency", max_latency,
                   "pick the tightest frontier point within this makespan (seconds)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  hetmc::RunOptions options;
  options.chunk_size = chunk_size;

  if (*price) {
    require_json_format(format, "price");
    const auto portfolio = load_portfolio(task_path, seed);
    const auto registry = platforms_path.empty()
                              ? default_registry()
                              : hetmc::load_registry(read_file(platforms_path));
    const auto& platform = platform_name.empty() ? registry.platforms.front()
                                                 : registry.by_name(platform_name);
    ordered_json out = ordered_json::array();
    for (const auto& task : portfolio.tasks) {
      const auto result = hetmc::execute(platform, task, n_paths, 0, chunk_size);
      const auto est = hetmc::estimate(result);
      out.push_back(ordered_json{{"task_id", task.id},
                                 {"price", est.price},
                                 {"std_error", est.std_error},
                                 {"ci_half_width", est.ci_half_width},
                                 {"n", est.n}});
    }
    std::cout << (out.size() == 1 ? out[0].dump(2) : out.dump(2)) << "\n";
    return 0;
  }

  if (*bench) {
    const auto portfolio = load_portfolio(task_path, seed);
    const auto registry = hetmc::load_registry(read_file(platforms_path));
    std::vector<std::uint64_t> sizes = options.benchmark_sizes;
    if (!sizes_csv.empty()) sizes = parse_count_list(sizes_csv, "--sizes");
    if (format == "csv") {
      std::ostringstream out;
      out << "task_id,platform,n,elapsed_s,sample_std\n";
      for (const auto& task : portfolio.tasks) {
        for (const auto& platform : registry.platforms) {
          for (const auto& o : hetmc::benchmark(platform, task, sizes, chunk_size)) {
            out << task.id << "," << platform.name << "," << o.n << ","
                << dump_double(o.elapsed_s) << "," << dump_double(o.sample_std)
                << "\n";
          }
        }
      }
      std::cout << out.str();
      return 0;
    }
    ordered_json out = ordered_json::array();
    for (const auto& task : portfolio.tasks) {
      for (const auto& platform : registry.platforms) {
        ordered_json jo;
        jo["task_id"] = task.id;
        jo["platform"] = platform.name;
        jo["observations"] = ordered_json::array();
        for (const auto& o : hetmc::benchmark(platform, task, sizes, chunk_size)) {
          jo["observations"].push_back(ordered_json{
              {"n", o.n}, {"elapsed_s", o.elapsed_s}, {"sample_std", o.sample_std}});
        }
        out.push_back(std::move(jo));
      }
    }
    std::cout << out.dump(2) << "\n";
    return 0;
  }

  if (*model) {
    require_json_format(format, "model");
    const auto portfolio = load_portfolio(task_path, seed);
    const auto registry = hetmc::load_registry(read_file(platforms_path));
    const auto models = hetmc::fit_models(portfolio, registry, options);
    std::cout << hetmc::models_to_json(models).dump(2) << "\n";
    return 0;
  }

  if (*front) {
    const auto portfolio = load_portfolio(task_path, seed);
    const auto registry = hetmc::load_registry(read_file(platforms_path));
    const auto models = hetmc::fit_models(portfolio, registry, options);
    std::vector<hetmc::TargetVector> targets;
    for (double v : parse_double_list(targets_csv, "--ci-targets")) {
      targets.push_back(targets_for({v}, portfolio.tasks.size(), "--ci-targets"));
    }
    const auto points = hetmc::frontier(models, targets);
    // Frontier output is CSV unless JSON is asked for explicitly.
    const std::string fmt = front->count("--format") ? format : "csv";
    if (fmt == "csv") {
      std::cout << frontier_csv(points, models);
    } else {
      std::cout << frontier_json(points, models).dump(2) << "\n";
    }
    return 0;
  }

  if (*part) {
    require_json_format(format, "partition");
    const auto portfolio = load_portfolio(task_path, seed);
    const auto registry = hetmc::load_registry(read_file(platforms_path));
    const auto models = hetmc::fit_models(portfolio, registry, options);
    const auto tv = targets_for(parse_double_list(targets_csv, "--ci-target"),
                                portfolio.tasks.size(), "--ci-target");
    const auto build = hetmc::build_cost_matrix(models, tv);
    const auto alloc = hetmc::optimize(models, build.path_demands);
    ordered_json out;
    ordered_json jt, jn;
    for (std::size_t t = 0; t < models.task_count(); ++t) {
      jt[models.task_ids[t]] = tv.ci_targets[t];
      jn[models.task_ids[t]] = build.path_demands[t];
    }
    out["ci_targets"] = std::move(jt);
    out["path_demands"] = std::move(jn);
    out["predicted_makespan_s"] = hetmc::objective(alloc, models, build.path_demands);
    out["allocation"] = hetmc::allocation_to_json(alloc, models);
    std::cout << out.dump(2) << "\n";
    return 0;
  }

  if (*runc) {
    require_json_format(format, "run");
    const auto portfolio = load_portfolio(task_path, seed);
    const auto registry = hetmc::load_registry(read_file(platforms_path));
    if (targets_csv.empty() == !max_latency.has_value()) {
      throw ValidationError("run: give exactly one of --ci-target or --max-latency");
    }
    const auto models = hetmc::fit_models(portfolio, registry, options);
    hetmc::TargetVector tv;
    if (!targets_csv.empty()) {
      tv = targets_for(parse_double_list(targets_csv, "--ci-target"),
                       portfolio.tasks.size(), "--ci-target");
    } else {
      // Ladder of frontier points around the models' ci at 1e6 paths; the
      // bound then picks the tightest one that fits.
      hetmc::TargetVector base;
      for (const auto& c : models.confidence) {
        base.ci_targets.push_back(std::max(hetmc::predict_ci(c, 1000000), 1e-12));
      }
      std::vector<hetmc::TargetVector> ladder;
      for (int e = -4; e <= 10; ++e) {
        hetmc::TargetVector scaled = base;
        for (double& v : scaled.ci_targets) v *= std::ldexp(1.0, e);
        ladder.push_back(std::move(scaled));
      }
      tv = hetmc::select_by_latency_bound(hetmc::frontier(models, ladder),
                                          *max_latency);
    }
    const auto report = hetmc::run_with_models(portfolio, registry, tv, models, options);
    std::cout << hetmc::report_to_json(report).dump(2) << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const hetmc::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const hetmc::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const hetmc::FitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
