#include "hetmc/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "hetmc/errors.hpp"

namespace hetmc {

PartialResult PartialResult::single(std::uint64_t chunk_index, std::uint64_t n,
                                    double sum, double sum_sq, double elapsed_s) {
  if (n == 0 && (sum != 0.0 || sum_sq != 0.0)) {
    throw ValidationError("PartialResult: n = 0 requires zero moment sums");
  }
  PartialResult r;
  if (n > 0) r.chunks_.push_back({chunk_index, n, sum, sum_sq});
  r.elapsed_s_ = elapsed_s;
  return r;
}

std::uint64_t PartialResult::n() const {
  std::uint64_t total = 0;
  for (const auto& c : chunks_) total += c.n;
  return total;
}

double PartialResult::sum() const {
  KahanSum acc;
  for (const auto& c : chunks_) acc.add(c.sum);
  return acc.value();
}

double PartialResult::sum_sq() const {
  KahanSum acc;
  for (const auto& c : chunks_) acc.add(c.sum_sq);
  return acc.value();
}

PartialResult merge(const PartialResult& a, const PartialResult& b) {
  PartialResult out;
  out.chunks_.reserve(a.chunks_.size() + b.chunks_.size());
  std::merge(a.chunks_.begin(), a.chunks_.end(), b.chunks_.begin(), b.chunks_.end(),
             std::back_inserter(out.chunks_),
             [](const ChunkMoments& x, const ChunkMoments& y) {
               return x.chunk_index < y.chunk_index;
             });
  for (std::size_t i = 1; i < out.chunks_.size(); ++i) {
    if (out.chunks_[i].chunk_index == out.chunks_[i - 1].chunk_index) {
      throw ValidationError("merge: duplicate chunk index " +
                            std::to_string(out.chunks_[i].chunk_index));
    }
  }
  out.elapsed_s_ = std::max(a.elapsed_s_, b.elapsed_s_);
  return out;
}

Estimate estimate(const PartialResult& r) {
  const std::uint64_t n = r.n();
  if (n < 2) {
    throw ValidationError("estimate: needs at least 2 paths (got " +
                          std::to_string(n) + ")");
  }
  const double nd = static_cast<double>(n);
  const double sum = r.sum();
  const double sum_sq = r.sum_sq();
  Estimate e;
  e.n = n;
  e.price = sum / nd;
  const double var = std::max(0.0, (sum_sq - sum * sum / nd) / (nd - 1.0));
  e.std_error = std::sqrt(var / nd);
  e.ci_half_width = kZ95 * e.std_error;
  return e;
}

namespace {

inline double vanilla(OptionKind kind, double terminal, double strike) {
  const double intrinsic = kind == OptionKind::Call ? terminal - strike
                                                    : strike - terminal;
  return intrinsic > 0.0 ? intrinsic : 0.0;
}

}  // namespace

double payoff(const DerivativeSpec& d, const PathSkeleton& path, double /*spot0*/) {
  return std::visit(
      [&](const auto& o) -> double {
        using O = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<O, EuropeanOption>) {
          return vanilla(o.kind, path.spots.back(), o.strike);
        } else if constexpr (std::is_same_v<O, AsianArithmeticOption>) {
          const std::size_t stride = path.spots.size() / o.fixings;
          double acc = 0.0;
          for (std::size_t k = stride - 1; k < path.spots.size(); k += stride) {
            acc += path.spots[k];
          }
          return vanilla(o.kind, acc / o.fixings, o.strike);
        } else {
          for (double s : path.spots) {
            if (o.direction == BarrierDirection::Up ? s >= o.barrier
                                                    : s <= o.barrier) {
              return 0.0;
            }
          }
          return vanilla(o.kind, path.spots.back(), o.strike);
        }
      },
      d);
}

StreamKey stream_key_for(const PricingTask& task, std::uint64_t chunk_index) {
  return StreamKey{task.base_seed, fnv1a64(task.id), chunk_index};
}

PartialResult run_chunk(const PricingTask& task, std::uint64_t n_paths,
                        std::uint64_t chunk_index) {
  if (n_paths == 0) throw ValidationError("run_chunk: n_paths must be >= 1");
  NormalStream stream(stream_key_for(task, chunk_index));
  const double T = maturity(task.derivative);
  const double discount = std::exp(-risk_free_rate(task.underlying) * T);
  const double s0 = spot0(task.underlying);

  PathSkeleton path;
  path.spots.reserve(task.steps);
  KahanSum sum, sum_sq;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::uint64_t i = 0; i < n_paths; ++i) {
    simulate_path(task.underlying, T, task.steps, stream, path);
    const double x = discount * payoff(task.derivative, path, s0);
    sum.add(x);
    sum_sq.add(x * x);
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return PartialResult::single(chunk_index, n_paths, sum.value(), sum_sq.value(),
                               elapsed);
}

}  // namespace hetmc
