#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hetmc/allocate.hpp"
#include "hetmc/domain.hpp"
#include "hetmc/platform.hpp"

#include "json.hpp"

namespace hetmc {

struct ShardReport {
  std::string platform;
  std::uint64_t paths = 0;
  std::uint64_t chunks = 0;
  double latency_s = 0.0;
  bool virtual_clock = false;
};

struct TaskReport {
  std::string id;
  double price = 0.0;
  double std_error = 0.0;
  double ci_half_width = 0.0;  // achieved, from merged moments
  double ci_target = 0.0;
  std::uint64_t path_demand = 0;  // N_t from the confidence model
  std::uint64_t paths_total = 0;  // executed (>= demand after chunk rounding)
  std::vector<ShardReport> shards;
};

struct RunReport {
  std::vector<TaskReport> tasks;
  std::vector<std::string> platform_names;
  std::vector<double> platform_latency_s;  // per-platform totals (shards run sequentially)
  /// "wall", "virtual", or "mixed". Makespans are never compared across
  /// clock domains; a mixed registry reports one makespan per domain.
  std::string clock_domain;
  double makespan_s = 0.0;          // single-domain makespan
  double wall_makespan_s = 0.0;     // populated when mixed
  double virtual_makespan_s = 0.0;  // populated when mixed
  AllocationMatrix allocation;
  ModelSet models;
  std::uint64_t chunk_size = kDefaultChunkSize;
};

struct RunOptions {
  std::vector<std::uint64_t> benchmark_sizes{1ull << 14, 1ull << 16};
  std::uint64_t chunk_size = kDefaultChunkSize;
};

/// Benchmarks every (platform, task) pair and fits the metric models: one
/// latency model per pair, one confidence model per task (numerics are
/// platform-invariant, so the confidence fit reuses the largest benchmark
/// observation).
ModelSet fit_models(const Portfolio& portfolio, const PlatformRegistry& registry,
                    const RunOptions& options = {});

/// The full pipeline: benchmark, fit, build the cost matrix, optimize the
/// allocation, round shards up to whole chunks over disjoint chunk ranges,
/// execute all shards concurrently (each platform serializes its own
/// queue), merge, and report.
RunReport run(const Portfolio& portfolio, const PlatformRegistry& registry,
              const TargetVector& targets, const RunOptions& options = {});

/// Same pipeline with pre-fitted models (skips the benchmarking pass).
RunReport run_with_models(const Portfolio& portfolio, const PlatformRegistry& registry,
                          const TargetVector& targets, const ModelSet& models,
                          const RunOptions& options = {});

/// Tradeoff selection over a frontier sorted tightest-first.
TargetVector select_by_index(const std::vector<FrontierPoint>& points,
                             std::size_t index);
/// Tightest targets whose makespan fits the bound; throws InfeasibleError
/// when every point exceeds it.
TargetVector select_by_latency_bound(const std::vector<FrontierPoint>& points,
                                     double max_latency_s);

nlohmann::ordered_json report_to_json(const RunReport& report);
nlohmann::ordered_json models_to_json(const ModelSet& models);
nlohmann::ordered_json allocation_to_json(const AllocationMatrix& alloc,
                                          const ModelSet& models);

}  // namespace hetmc
