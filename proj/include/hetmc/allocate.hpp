#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hetmc/metrics.hpp"

namespace hetmc {

/// Per-task confidence-interval targets, ordered as the portfolio.
struct TargetVector {
  std::vector<double> ci_targets;
};

/// One latency model per (platform, task) pair plus one confidence model
/// per task. Rows are platforms, columns are tasks, everywhere below.
struct ModelSet {
  std::vector<std::string> platform_names;
  std::vector<std::string> task_ids;
  std::vector<std::vector<LatencyModel>> latency;  // [platform][task]
  std::vector<ConfidenceModel> confidence;         // [task]

  std::size_t platform_count() const { return platform_names.size(); }
  std::size_t task_count() const { return task_ids.size(); }
  void validate() const;

  /// Assembles a dense set from maps; throws a missing-model error naming
  /// the (platform, task) pair.
  static ModelSet from_maps(
      const std::vector<std::string>& platforms, const std::vector<std::string>& tasks,
      const std::map<std::pair<std::string, std::string>, LatencyModel>& latency,
      const std::map<std::string, ConfidenceModel>& confidence);
};

/// c[p][t] = latency for platform p to complete task t alone at its target.
struct CostMatrix {
  std::vector<std::vector<double>> c;  // [platform][task]
};

/// Fractional assignment a[p][t] in [0, 1]; every column sums to 1 within
/// 1e-9. Fractions below 1e-6 are snapped to 0 (columns renormalized) so
/// indicator setup charges are well-defined.
struct AllocationMatrix {
  std::vector<std::vector<double>> a;  // [platform][task]

  std::size_t platform_count() const { return a.size(); }
  std::size_t task_count() const { return a.empty() ? 0 : a[0].size(); }
  std::vector<double> column_sums() const;
  void validate() const;
};

inline constexpr double kColumnSumTolerance = 1e-9;
inline constexpr double kFractionSnap = 1e-6;

struct CostBuild {
  CostMatrix cost;
  std::vector<std::uint64_t> path_demands;  // N_t per task
};

/// N_t = required_paths(confidence_t, target_t);
/// c[p][t] = setup_s(p,t) + N_t / rate(p,t).
CostBuild build_cost_matrix(const ModelSet& models, const TargetVector& targets);

/// Makespan objective: tasks on one platform run sequentially and setup is
/// charged once per active (platform, task) pair:
///   F(A) = max_p sum_t [ 1{a[p][t] > 0} * setup(p,t) + a[p][t]*N_t/rate(p,t) ].
double objective(const AllocationMatrix& alloc, const ModelSet& models,
                 const std::vector<std::uint64_t>& path_demands);

/// Minimizes the makespan objective. Instances with P*T <= 9 are solved
/// exactly (support-pattern enumeration with an LP per pattern); larger
/// instances use a local-search heuristic that never loses to any
/// single-platform allocation nor to the proportional-to-rate allocation.
AllocationMatrix optimize(const ModelSet& models,
                          const std::vector<std::uint64_t>& path_demands);

/// Exhaustive oracle over per-column simplex-grid allocations. Requires
/// P*T <= 9 and grid_step in {0.01, 0.05}.
AllocationMatrix brute_force(const ModelSet& models,
                             const std::vector<std::uint64_t>& path_demands,
                             double grid_step);

struct FrontierPoint {
  TargetVector targets;
  double makespan_s = 0.0;
  AllocationMatrix alloc;
  std::vector<std::uint64_t> path_demands;
};

/// One optimized point per target vector, sorted tightest target first
/// (descending makespan).
std::vector<FrontierPoint> frontier(const ModelSet& models,
                                    const std::vector<TargetVector>& targets);

}  // namespace hetmc
