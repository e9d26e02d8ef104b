#include "hetmc/platform.hpp"

#include <atomic>
#include <chrono>
#include <set>
#include <thread>

#include "hetmc/errors.hpp"
#include "json.hpp"

namespace hetmc {

using nlohmann::ordered_json;

double PlatformSpec::simulated_rate_for(const std::string& task_id) const {
  const auto& sim = std::get<SimulatedSpec>(kind);
  auto it = sim.task_rates.find(task_id);
  return it != sim.task_rates.end() ? it->second : sim.rate;
}

const PlatformSpec& PlatformRegistry::by_name(const std::string& name) const {
  for (const auto& p : platforms) {
    if (p.name == name) return p;
  }
  throw ValidationError("registry: no platform named '" + name + "'");
}

void validate_registry(const PlatformRegistry& r) {
  if (r.platforms.empty()) {
    throw ValidationError("registry: platform list must be non-empty");
  }
  std::set<std::string> seen;
  for (const auto& p : r.platforms) {
    const std::string ctx = "platform '" + p.name + "'";
    if (p.name.empty()) throw ValidationError("platform: name must be non-empty");
    if (!seen.insert(p.name).second) {
      throw ValidationError("registry: duplicate platform name '" + p.name + "'");
    }
    if (const auto* cpu = std::get_if<LocalCpuSpec>(&p.kind)) {
      if (cpu->workers < 1) throw ValidationError(ctx + ": workers must be >= 1");
    } else {
      const auto& sim = std::get<SimulatedSpec>(p.kind);
      if (!(sim.rate > 0.0)) throw ValidationError(ctx + ": rate must be > 0");
      if (!(sim.setup_s >= 0.0)) throw ValidationError(ctx + ": setup_s must be >= 0");
      for (const auto& [task_id, rate] : sim.task_rates) {
        if (!(rate > 0.0)) {
          throw ValidationError(ctx + ": task_rates['" + task_id +
                                "'] must be > 0");
        }
      }
    }
  }
}

PlatformRegistry load_registry(const std::string& text) {
  ordered_json root;
  try {
    root = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("platform file: ") + e.what());
  }
  if (!root.is_object() || !root.contains("platforms") ||
      !root["platforms"].is_array()) {
    throw ValidationError("platform file: expected {\"platforms\": [...]}");
  }

  PlatformRegistry reg;
  for (const auto& jp : root["platforms"]) {
    if (!jp.is_object() || !jp.contains("name") || !jp["name"].is_string()) {
      throw ValidationError("platform file: each platform needs a string 'name'");
    }
    PlatformSpec p;
    p.name = jp["name"].get<std::string>();
    const std::string ctx = "platform '" + p.name + "'";
    if (!jp.contains("type") || !jp["type"].is_string()) {
      throw ValidationError(ctx + ": missing string field 'type'");
    }
    const std::string type = jp["type"].get<std::string>();
    if (type == "local_cpu") {
      LocalCpuSpec cpu;
      if (!jp.contains("workers") || !jp["workers"].is_number_integer()) {
        throw ValidationError(ctx + ": missing integer field 'workers'");
      }
      const std::int64_t w = jp["workers"].get<std::int64_t>();
      if (w < 1) throw ValidationError(ctx + ": workers must be >= 1");
      cpu.workers = static_cast<unsigned>(w);
      p.kind = cpu;
    } else if (type == "simulated") {
      SimulatedSpec sim;
      if (!jp.contains("rate") || !jp["rate"].is_number()) {
        throw ValidationError(ctx + ": missing numeric field 'rate'");
      }
      sim.rate = jp["rate"].get<double>();
      if (jp.contains("setup_s")) {
        if (!jp["setup_s"].is_number()) {
          throw ValidationError(ctx + ": field 'setup_s' must be a number");
        }
        sim.setup_s = jp["setup_s"].get<double>();
      }
      if (jp.contains("task_rates")) {
        if (!jp["task_rates"].is_object()) {
          throw ValidationError(ctx + ": field 'task_rates' must be an object");
        }
        for (const auto& [task_id, rate] : jp["task_rates"].items()) {
          if (!rate.is_number()) {
            throw ValidationError(ctx + ": task_rates['" + task_id +
                                  "'] must be a number");
          }
          sim.task_rates[task_id] = rate.get<double>();
        }
      }
      p.kind = sim;
    } else {
      throw ValidationError(ctx + ": unknown platform type \"" + type + "\"");
    }
    reg.platforms.push_back(std::move(p));
  }
  validate_registry(reg);
  return reg;
}

namespace {

struct ChunkPlan {
  std::uint64_t index;
  std::uint64_t paths;
};

std::vector<ChunkPlan> plan_chunks(std::uint64_t n_paths, std::uint64_t first_chunk,
                                   std::uint64_t chunk_size) {
  std::vector<ChunkPlan> plan;
  const std::uint64_t n_chunks = (n_paths + chunk_size - 1) / chunk_size;
  plan.reserve(n_chunks);
  std::uint64_t remaining = n_paths;
  for (std::uint64_t i = 0; i < n_chunks; ++i) {
    const std::uint64_t take = std::min(chunk_size, remaining);
    plan.push_back({first_chunk + i, take});
    remaining -= take;
  }
  return plan;
}

/// Runs the planned chunks across `workers` threads and unions the results.
/// The chunk-keyed merge makes the outcome independent of scheduling order.
PartialResult run_chunks_parallel(const PricingTask& task,
                                  const std::vector<ChunkPlan>& plan,
                                  unsigned workers) {
  const unsigned n_threads =
      std::min<std::uint64_t>(workers, plan.size()) > 0
          ? static_cast<unsigned>(std::min<std::uint64_t>(workers, plan.size()))
          : 1u;
  if (n_threads == 1) {
    PartialResult acc;
    for (const auto& c : plan) acc = merge(acc, run_chunk(task, c.paths, c.index));
    return acc;
  }
  std::atomic<std::size_t> next{0};
  std::vector<PartialResult> per_thread(n_threads);
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (unsigned w = 0; w < n_threads; ++w) {
    pool.emplace_back([&, w] {
      PartialResult acc;
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= plan.size()) break;
        acc = merge(acc, run_chunk(task, plan[i].paths, plan[i].index));
      }
      per_thread[w] = std::move(acc);
    });
  }
  for (auto& t : pool) t.join();
  PartialResult acc;
  for (auto& r : per_thread) acc = merge(acc, r);
  return acc;
}

}  // namespace

PartialResult execute(const PlatformSpec& p, const PricingTask& task,
                      std::uint64_t n_paths, std::uint64_t first_chunk,
                      std::uint64_t chunk_size) {
  if (n_paths == 0) throw ValidationError("execute: n_paths must be >= 1");
  if (chunk_size == 0) throw ValidationError("execute: chunk_size must be >= 1");
  const auto plan = plan_chunks(n_paths, first_chunk, chunk_size);

  if (const auto* cpu = std::get_if<LocalCpuSpec>(&p.kind)) {
    const auto t0 = std::chrono::steady_clock::now();
    PartialResult result = run_chunks_parallel(task, plan, cpu->workers);
    result.set_elapsed_s(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    return result;
  }

  // Simulated: real numerics on all available cores, virtual latency.
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  PartialResult result = run_chunks_parallel(task, plan, hw);
  const auto& sim = std::get<SimulatedSpec>(p.kind);
  result.set_elapsed_s(sim.setup_s +
                       static_cast<double>(n_paths) / p.simulated_rate_for(task.id));
  return result;
}

}  // namespace hetmc
