#include "hetmc/allocate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "hetmc/errors.hpp"

namespace hetmc {

void ModelSet::validate() const {
  if (platform_names.empty()) throw ValidationError("models: no platforms");
  if (task_ids.empty()) throw ValidationError("models: no tasks");
  if (latency.size() != platform_names.size()) {
    throw ValidationError("models: latency row count does not match platforms");
  }
  for (std::size_t p = 0; p < latency.size(); ++p) {
    if (latency[p].size() != task_ids.size()) {
      throw ValidationError("models: latency column count does not match tasks for platform '" +
                            platform_names[p] + "'");
    }
    for (std::size_t t = 0; t < latency[p].size(); ++t) {
      if (!(latency[p][t].rate > 0.0) || !(latency[p][t].setup_s >= 0.0)) {
        throw ValidationError("models: invalid latency model for platform '" +
                              platform_names[p] + "', task '" + task_ids[t] + "'");
      }
    }
  }
  if (confidence.size() != task_ids.size()) {
    throw ValidationError("models: confidence model count does not match tasks");
  }
  for (std::size_t t = 0; t < confidence.size(); ++t) {
    if (!(confidence[t].k >= 0.0)) {
      throw ValidationError("models: invalid confidence model for task '" +
                            task_ids[t] + "'");
    }
  }
}

ModelSet ModelSet::from_maps(
    const std::vector<std::string>& platforms, const std::vector<std::string>& tasks,
    const std::map<std::pair<std::string, std::string>, LatencyModel>& latency,
    const std::map<std::string, ConfidenceModel>& confidence) {
  ModelSet m;
  m.platform_names = platforms;
  m.task_ids = tasks;
  m.latency.resize(platforms.size());
  for (std::size_t p = 0; p < platforms.size(); ++p) {
    for (const auto& task : tasks) {
      auto it = latency.find({platforms[p], task});
      if (it == latency.end()) {
        throw ValidationError("models: no latency model for platform '" +
                              platforms[p] + "', task '" + task + "'");
      }
      m.latency[p].push_back(it->second);
    }
  }
  for (const auto& task : tasks) {
    auto it = confidence.find(task);
    if (it == confidence.end()) {
      throw ValidationError("models: no confidence model for task '" + task + "'");
    }
    m.confidence.push_back(it->second);
  }
  m.validate();
  return m;
}

std::vector<double> AllocationMatrix::column_sums() const {
  std::vector<double> sums(task_count(), 0.0);
  for (const auto& row : a) {
    for (std::size_t t = 0; t < row.size(); ++t) sums[t] += row[t];
  }
  return sums;
}

void AllocationMatrix::validate() const {
  if (a.empty() || a[0].empty()) throw ValidationError("allocation: empty matrix");
  for (const auto& row : a) {
    if (row.size() != a[0].size()) throw ValidationError("allocation: ragged matrix");
    for (double v : row) {
      if (!(v >= 0.0 && v <= 1.0 + kColumnSumTolerance)) {
        throw ValidationError("allocation: fraction outside [0, 1]");
      }
    }
  }
  for (double s : column_sums()) {
    if (std::fabs(s - 1.0) > kColumnSumTolerance) {
      throw ValidationError("allocation: column sum " + std::to_string(s) +
                            " is not 1");
    }
  }
}

CostBuild build_cost_matrix(const ModelSet& models, const TargetVector& targets) {
  models.validate();
  const std::size_t P = models.platform_count();
  const std::size_t T = models.task_count();
  if (targets.ci_targets.size() != T) {
    throw ValidationError("targets: expected " + std::to_string(T) +
                          " ci targets, got " + std::to_string(targets.ci_targets.size()));
  }
  CostBuild out;
  out.path_demands.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    if (!(targets.ci_targets[t] > 0.0)) {
      throw ValidationError("targets: ci target for task '" + models.task_ids[t] +
                            "' must be > 0");
    }
    out.path_demands.push_back(required_paths(models.confidence[t], targets.ci_targets[t]));
  }
  out.cost.c.assign(P, std::vector<double>(T, 0.0));
  for (std::size_t p = 0; p < P; ++p) {
    for (std::size_t t = 0; t < T; ++t) {
      out.cost.c[p][t] = models.latency[p][t].setup_s +
                         static_cast<double>(out.path_demands[t]) /
                             models.latency[p][t].rate;
    }
  }
  return out;
}

double objective(const AllocationMatrix& alloc, const ModelSet& models,
                 const std::vector<std::uint64_t>& path_demands) {
  const std::size_t P = models.platform_count();
  const std::size_t T = models.task_count();
  if (alloc.platform_count() != P || alloc.task_count() != T ||
      path_demands.size() != T) {
    throw ValidationError("objective: shape mismatch");
  }
  double makespan = 0.0;
  for (std::size_t p = 0; p < P; ++p) {
    double time = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      const double a = alloc.a[p][t];
      if (a > 0.0) {
        time += models.latency[p][t].setup_s +
                a * static_cast<double>(path_demands[t]) / models.latency[p][t].rate;
      }
    }
    makespan = std::max(makespan, time);
  }
  return makespan;
}

namespace {

constexpr double kImprovementEps = 1e-12;

/// Snap sub-threshold fractions to zero and renormalize each column to 1.
void snap_columns(AllocationMatrix& alloc) {
  const std::size_t P = alloc.platform_count();
  const std::size_t T = alloc.task_count();
  for (std::size_t t = 0; t < T; ++t) {
    double sum = 0.0;
    for (std::size_t p = 0; p < P; ++p) {
      double& v = alloc.a[p][t];
      if (v < kFractionSnap) v = 0.0;
      sum += v;
    }
    if (!(sum > 0.0)) throw std::logic_error("allocation column vanished");
    for (std::size_t p = 0; p < P; ++p) alloc.a[p][t] /= sum;
  }
}

// ---------------------------------------------------------------------------
// Dense two-phase simplex for the tiny per-pattern LPs.
// minimize c.x  s.t.  A x = b (b >= 0), x >= 0.
// Bland's rule on both pivots, so it terminates on degenerate instances.
// ---------------------------------------------------------------------------

struct LpResult {
  std::vector<double> x;
  double value = 0.0;
};

LpResult solve_lp(const std::vector<std::vector<double>>& A,
                  const std::vector<double>& b, const std::vector<double>& c) {
  const std::size_t m = A.size();
  const std::size_t n = c.size();
  const std::size_t total = n + m;  // structural + artificial
  constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::vector<std::vector<double>> tab(m, std::vector<double>(total + 1, 0.0));
  std::vector<std::size_t> basis(m);
  std::vector<char> in_basis(total, 0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) tab[i][j] = A[i][j];
    tab[i][n + i] = 1.0;
    tab[i][total] = b[i];
    basis[i] = n + i;
    in_basis[n + i] = 1;
  }

  auto pivot = [&](std::size_t row, std::size_t col) {
    const double piv = tab[row][col];
    for (double& v : tab[row]) v /= piv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == row) continue;
      const double f = tab[i][col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= total; ++j) tab[i][j] -= f * tab[row][j];
    }
    in_basis[basis[row]] = 0;
    in_basis[col] = 1;
    basis[row] = col;
  };

  auto iterate = [&](const std::vector<double>& cost, std::size_t scan_cols) {
    for (int round = 0; round < 20000; ++round) {
      std::size_t enter = npos;
      for (std::size_t j = 0; j < scan_cols; ++j) {
        if (in_basis[j]) continue;
        double rc = cost[j];
        for (std::size_t i = 0; i < m; ++i) rc -= cost[basis[i]] * tab[i][j];
        if (rc < -1e-9) {
          enter = j;
          break;
        }
      }
      if (enter == npos) return;
      std::size_t leave = npos;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        if (tab[i][enter] > 1e-11) {
          const double ratio = tab[i][total] / tab[i][enter];
          if (ratio < best_ratio - 1e-12 ||
              (ratio < best_ratio + 1e-12 &&
               (leave == npos || basis[i] < basis[leave]))) {
            best_ratio = ratio;
            leave = i;
          }
        }
      }
      if (leave == npos) throw std::logic_error("lp: unbounded");
      pivot(leave, enter);
    }
    throw std::logic_error("lp: iteration limit");
  };

  std::vector<double> phase1(total, 0.0);
  for (std::size_t j = n; j < total; ++j) phase1[j] = 1.0;
  iterate(phase1, total);
  double infeasibility = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] >= n) infeasibility += tab[i][total];
  }
  if (infeasibility > 1e-7) throw std::logic_error("lp: infeasible");

  // Drive leftover artificials out of the basis where possible.
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (!in_basis[j] && std::fabs(tab[i][j]) > 1e-9) {
        pivot(i, j);
        break;
      }
    }
  }

  std::vector<double> phase2(total, 0.0);
  for (std::size_t j = 0; j < n; ++j) phase2[j] = c[j];
  iterate(phase2, n);

  LpResult res;
  res.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) res.x[basis[i]] = std::max(0.0, tab[i][total]);
  }
  for (std::size_t j = 0; j < n; ++j) res.value += c[j] * res.x[j];
  return res;
}

// ---------------------------------------------------------------------------
// Exact optimizer: enumerate support patterns, solve the remaining divisible
// split as an LP per pattern. The setup indicator makes the objective
// non-convex; with all pairs of a pattern charged, the pattern minimum is an
// LP, and the minimum over all covering patterns is the true optimum.
// ---------------------------------------------------------------------------

double pair_work(const ModelSet& m, const std::vector<std::uint64_t>& N,
                 std::size_t p, std::size_t t) {
  return static_cast<double>(N[t]) / m.latency[p][t].rate;
}

AllocationMatrix solve_pattern(const ModelSet& m, const std::vector<std::uint64_t>& N,
                               unsigned mask) {
  const std::size_t P = m.platform_count();
  const std::size_t T = m.task_count();

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<double> fixed(P, 0.0);
  std::vector<char> active(P, 0);
  for (std::size_t p = 0; p < P; ++p) {
    for (std::size_t t = 0; t < T; ++t) {
      if (mask & (1u << (p * T + t))) {
        pairs.emplace_back(p, t);
        fixed[p] += m.latency[p][t].setup_s;
        active[p] = 1;
      }
    }
  }

  // Scale the time dimension so all coefficients are O(1).
  double scale = 1e-12;
  for (const auto& [p, t] : pairs) scale = std::max(scale, pair_work(m, N, p, t));
  for (std::size_t p = 0; p < P; ++p) {
    if (active[p]) scale = std::max(scale, fixed[p]);
  }

  std::vector<std::size_t> platform_row(P, 0);
  std::size_t n_active = 0;
  for (std::size_t p = 0; p < P; ++p) {
    if (active[p]) platform_row[p] = n_active++;
  }

  const std::size_t k = pairs.size();
  const std::size_t n_vars = k + 1 + n_active;  // fractions, M, slacks
  const std::size_t n_rows = T + n_active;
  std::vector<std::vector<double>> A(n_rows, std::vector<double>(n_vars, 0.0));
  std::vector<double> b(n_rows, 0.0);
  for (std::size_t t = 0; t < T; ++t) b[t] = 1.0;
  for (std::size_t idx = 0; idx < k; ++idx) {
    const auto [p, t] = pairs[idx];
    A[t][idx] = 1.0;
    A[T + platform_row[p]][idx] = -pair_work(m, N, p, t) / scale;
  }
  for (std::size_t p = 0; p < P; ++p) {
    if (!active[p]) continue;
    const std::size_t row = T + platform_row[p];
    A[row][k] = 1.0;                          // M
    A[row][k + 1 + platform_row[p]] = -1.0;   // slack
    b[row] = fixed[p] / scale;
  }
  std::vector<double> c(n_vars, 0.0);
  c[k] = 1.0;

  const LpResult lp = solve_lp(A, b, c);

  AllocationMatrix alloc;
  alloc.a.assign(P, std::vector<double>(T, 0.0));
  for (std::size_t idx = 0; idx < k; ++idx) {
    const auto [p, t] = pairs[idx];
    alloc.a[p][t] = lp.x[idx];
  }
  snap_columns(alloc);
  return alloc;
}

AllocationMatrix optimize_exact(const ModelSet& m,
                                const std::vector<std::uint64_t>& N) {
  const std::size_t P = m.platform_count();
  const std::size_t T = m.task_count();
  const unsigned n_pairs = static_cast<unsigned>(P * T);

  double best_value = std::numeric_limits<double>::infinity();
  AllocationMatrix best;
  for (unsigned mask = 1; mask < (1u << n_pairs); ++mask) {
    bool covered = true;
    for (std::size_t t = 0; t < T && covered; ++t) {
      bool any = false;
      for (std::size_t p = 0; p < P; ++p) {
        if (mask & (1u << (p * T + t))) {
          any = true;
          break;
        }
      }
      covered = any;
    }
    if (!covered) continue;
    AllocationMatrix alloc = solve_pattern(m, N, mask);
    const double value = objective(alloc, m, N);
    if (value < best_value) {
      best_value = value;
      best = std::move(alloc);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Heuristic for larger instances: best of {proportional-to-rate, every
// single-platform allocation}, improved by shifting fractions off the
// bottleneck platform while moves keep paying off.
// ---------------------------------------------------------------------------

AllocationMatrix proportional_allocation(const ModelSet& m) {
  const std::size_t P = m.platform_count();
  const std::size_t T = m.task_count();
  AllocationMatrix alloc;
  alloc.a.assign(P, std::vector<double>(T, 0.0));
  for (std::size_t t = 0; t < T; ++t) {
    double total = 0.0;
    for (std::size_t p = 0; p < P; ++p) total += m.latency[p][t].rate;
    for (std::size_t p = 0; p < P; ++p) {
      alloc.a[p][t] = m.latency[p][t].rate / total;
    }
  }
  snap_columns(alloc);
  return alloc;
}

AllocationMatrix single_platform_allocation(const ModelSet& m, std::size_t p) {
  AllocationMatrix alloc;
  alloc.a.assign(m.platform_count(), std::vector<double>(m.task_count(), 0.0));
  for (std::size_t t = 0; t < m.task_count(); ++t) alloc.a[p][t] = 1.0;
  return alloc;
}

std::size_t bottleneck_platform(const AllocationMatrix& alloc, const ModelSet& m,
                                const std::vector<std::uint64_t>& N) {
  std::size_t arg = 0;
  double worst = -1.0;
  for (std::size_t p = 0; p < m.platform_count(); ++p) {
    double time = 0.0;
    for (std::size_t t = 0; t < m.task_count(); ++t) {
      const double a = alloc.a[p][t];
      if (a > 0.0) time += m.latency[p][t].setup_s + a * pair_work(m, N, p, t);
    }
    if (time > worst) {
      worst = time;
      arg = p;
    }
  }
  return arg;
}

AllocationMatrix optimize_heuristic(const ModelSet& m,
                                    const std::vector<std::uint64_t>& N) {
  const std::size_t P = m.platform_count();
  const std::size_t T = m.task_count();

  AllocationMatrix cur = proportional_allocation(m);
  double cur_value = objective(cur, m, N);
  for (std::size_t p = 0; p < P; ++p) {
    AllocationMatrix cand = single_platform_allocation(m, p);
    const double v = objective(cand, m, N);
    if (v < cur_value) {
      cur_value = v;
      cur = std::move(cand);
    }
  }

  const std::size_t budget = P * T * 100;
  std::size_t non_improving = 0;
  static constexpr double kMoveFractions[] = {1.0, 0.5, 0.25, 0.125};
  while (non_improving < budget) {
    const std::size_t hot = bottleneck_platform(cur, m, N);
    bool improved = false;
    for (std::size_t t = 0; t < T && !improved; ++t) {
      if (cur.a[hot][t] <= 0.0) continue;
      for (std::size_t q = 0; q < P && !improved; ++q) {
        if (q == hot) continue;
        for (double frac : kMoveFractions) {
          AllocationMatrix cand = cur;
          const double delta = cand.a[hot][t] * frac;
          cand.a[hot][t] -= delta;
          cand.a[q][t] += delta;
          snap_columns(cand);
          const double v = objective(cand, m, N);
          if (v < cur_value - kImprovementEps * std::max(1.0, cur_value)) {
            cur = std::move(cand);
            cur_value = v;
            improved = true;
            break;
          }
          if (++non_improving >= budget) return cur;
        }
      }
    }
    if (!improved) break;  // no move off the bottleneck helps; local optimum
  }
  return cur;
}

}  // namespace

AllocationMatrix optimize(const ModelSet& models,
                          const std::vector<std::uint64_t>& path_demands) {
  models.validate();
  if (path_demands.size() != models.task_count()) {
    throw ValidationError("optimize: path demand count does not match tasks");
  }
  for (std::uint64_t n : path_demands) {
    if (n == 0) throw ValidationError("optimize: path demands must be >= 1");
  }
  if (models.platform_count() * models.task_count() <= 9) {
    return optimize_exact(models, path_demands);
  }
  return optimize_heuristic(models, path_demands);
}

// ---------------------------------------------------------------------------
// Grid oracle: depth-first search over per-column simplex-grid compositions
// with an admissible bound (current max load, plus remaining work spread
// perfectly across all platforms), so it still returns the exact grid
// minimizer after pruning.
// ---------------------------------------------------------------------------

namespace {

struct GridOption {
  std::vector<int> counts;      // grid units per platform, sums to G
  std::vector<double> inc;      // load increment per platform
  double worst_inc = 0.0;
};

void enumerate_compositions(int units, std::size_t slot, std::vector<int>& counts,
                            std::vector<GridOption>& out) {
  if (slot + 1 == counts.size()) {
    counts[slot] = units;
    out.push_back(GridOption{counts, {}, 0.0});
    return;
  }
  for (int u = units; u >= 0; --u) {
    counts[slot] = u;
    enumerate_compositions(units - u, slot + 1, counts, out);
  }
}

struct GridSearch {
  const ModelSet& m;
  const std::vector<std::uint64_t>& N;
  std::vector<std::vector<GridOption>> options;  // per column (task order)
  std::vector<std::size_t> column_order;
  std::vector<double> tail_min_work;  // suffix sums of per-task minimal work
  std::vector<double> loads;
  std::vector<std::size_t> choice;
  std::vector<std::size_t> best_choice;
  double best_value = std::numeric_limits<double>::infinity();

  void dfs(std::size_t depth, double partial_max) {
    const std::size_t P = m.platform_count();
    double load_sum = 0.0;
    for (double v : loads) load_sum += v;
    const double bound =
        std::max(partial_max, (load_sum + tail_min_work[depth]) / static_cast<double>(P));
    if (bound >= best_value) return;
    if (depth == column_order.size()) {
      best_value = partial_max;
      best_choice = choice;
      return;
    }
    const std::size_t t = column_order[depth];
    for (std::size_t oi = 0; oi < options[t].size(); ++oi) {
      const GridOption& opt = options[t][oi];
      if (std::max(partial_max, opt.worst_inc) >= best_value) continue;
      double new_max = partial_max;
      for (std::size_t p = 0; p < P; ++p) {
        loads[p] += opt.inc[p];
        new_max = std::max(new_max, loads[p]);
      }
      if (new_max < best_value) {
        choice[depth] = oi;
        dfs(depth + 1, new_max);
      }
      for (std::size_t p = 0; p < P; ++p) loads[p] -= opt.inc[p];
    }
  }
};

}  // namespace

AllocationMatrix brute_force(const ModelSet& models,
                             const std::vector<std::uint64_t>& path_demands,
                             double grid_step) {
  models.validate();
  const std::size_t P = models.platform_count();
  const std::size_t T = models.task_count();
  if (path_demands.size() != T) {
    throw ValidationError("brute_force: path demand count does not match tasks");
  }
  if (std::fabs(grid_step - 0.01) > 1e-12 && std::fabs(grid_step - 0.05) > 1e-12) {
    throw ValidationError("brute_force: grid_step must be 0.01 or 0.05");
  }
  if (P * T > 9) {
    throw ValidationError("brute_force: instance too large (platforms * tasks must be <= 9)");
  }
  const int G = static_cast<int>(std::lround(1.0 / grid_step));

  GridSearch search{models, path_demands, {}, {}, {}, {}, {}, {}};
  search.options.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<int> counts(P, 0);
    enumerate_compositions(G, 0, counts, search.options[t]);
    for (auto& opt : search.options[t]) {
      opt.inc.assign(P, 0.0);
      for (std::size_t p = 0; p < P; ++p) {
        if (opt.counts[p] > 0) {
          opt.inc[p] = models.latency[p][t].setup_s +
                       (opt.counts[p] * grid_step) * pair_work(models, path_demands, p, t);
          opt.worst_inc = std::max(opt.worst_inc, opt.inc[p]);
        }
      }
    }
    // Balanced options first: tight incumbents make the bound bite early.
    std::sort(search.options[t].begin(), search.options[t].end(),
              [](const GridOption& x, const GridOption& y) {
                return x.worst_inc < y.worst_inc;
              });
  }

  // Search big columns first; their choices constrain the bound most.
  std::vector<double> min_work(T, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    double best_rate = 0.0;
    for (std::size_t p = 0; p < P; ++p) {
      best_rate = std::max(best_rate, models.latency[p][t].rate);
    }
    min_work[t] = static_cast<double>(path_demands[t]) / best_rate;
  }
  search.column_order.resize(T);
  std::iota(search.column_order.begin(), search.column_order.end(), std::size_t{0});
  std::sort(search.column_order.begin(), search.column_order.end(),
            [&](std::size_t x, std::size_t y) { return min_work[x] > min_work[y]; });
  search.tail_min_work.assign(T + 1, 0.0);
  for (std::size_t d = T; d-- > 0;) {
    search.tail_min_work[d] =
        search.tail_min_work[d + 1] + min_work[search.column_order[d]];
  }

  search.loads.assign(P, 0.0);
  search.choice.assign(T, 0);
  search.dfs(0, 0.0);
  if (search.best_choice.empty() && T > 0 && search.best_value == std::numeric_limits<double>::infinity()) {
    throw std::logic_error("brute_force: no feasible grid point");
  }

  AllocationMatrix alloc;
  alloc.a.assign(P, std::vector<double>(T, 0.0));
  for (std::size_t depth = 0; depth < T; ++depth) {
    const std::size_t t = search.column_order[depth];
    const GridOption& opt = search.options[t][search.best_choice[depth]];
    for (std::size_t p = 0; p < P; ++p) {
      alloc.a[p][t] = opt.counts[p] * grid_step;
    }
  }
  return alloc;
}

std::vector<FrontierPoint> frontier(const ModelSet& models,
                                    const std::vector<TargetVector>& targets) {
  if (targets.empty()) throw ValidationError("frontier: target list must be non-empty");
  std::vector<FrontierPoint> points;
  points.reserve(targets.size());
  for (const auto& tv : targets) {
    const CostBuild build = build_cost_matrix(models, tv);
    FrontierPoint pt;
    pt.targets = tv;
    pt.path_demands = build.path_demands;
    pt.alloc = optimize(models, build.path_demands);
    pt.makespan_s = objective(pt.alloc, models, build.path_demands);
    points.push_back(std::move(pt));
  }
  std::stable_sort(points.begin(), points.end(),
                   [](const FrontierPoint& a, const FrontierPoint& b) {
                     return a.makespan_s > b.makespan_s;
                   });
  return points;
}

}  // namespace hetmc
