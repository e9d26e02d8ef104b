#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "hetmc/domain.hpp"
#include "hetmc/path.hpp"
#include "hetmc/rng.hpp"

namespace hetmc {

/// Two-sided 95% normal quantile used for every confidence interval.
inline constexpr double kZ95 = 1.959964;

/// Default number of paths per chunk; chunk indices are assigned globally
/// per task so any platform subset covers a disjoint index range.
inline constexpr std::uint64_t kDefaultChunkSize = 65536;

/// Chunk indices with this bit set are reserved for benchmarking runs, so
/// production ranges stay contiguous from 0.
inline constexpr std::uint64_t kBenchmarkChunkBit = 1ull << 63;

/// Moment sums of one simulated chunk.
struct ChunkMoments {
  std::uint64_t chunk_index = 0;
  std::uint64_t n = 0;
  double sum = 0.0;     // sum of discounted payoffs
  double sum_sq = 0.0;  // sum of squared discounted payoffs
};

/// Mergeable Monte Carlo moment sums, keyed by chunk index.
///
/// Moments are kept per chunk and totals are always folded over ascending
/// chunk index, which makes merge exactly associative and commutative and
/// makes a split run bit-identical to a whole run over the same chunk set,
/// regardless of how the work was grouped or which platform ran it.
class PartialResult {
 public:
  PartialResult() = default;

  static PartialResult single(std::uint64_t chunk_index, std::uint64_t n, double sum,
                              double sum_sq, double elapsed_s);

  /// Total path count across chunks.
  std::uint64_t n() const;
  /// Canonical fold of per-chunk payoff sums (compensated, ascending index).
  double sum() const;
  /// Canonical fold of per-chunk squared-payoff sums.
  double sum_sq() const;
  /// Reported latency in seconds; wall or virtual per platform.
  double elapsed_s() const { return elapsed_s_; }
  void set_elapsed_s(double s) { elapsed_s_ = s; }

  const std::vector<ChunkMoments>& chunks() const { return chunks_; }

  friend PartialResult merge(const PartialResult& a, const PartialResult& b);

 private:
  std::vector<ChunkMoments> chunks_;  // sorted by chunk_index, indices distinct
  double elapsed_s_ = 0.0;
};

/// Parallel composition: unions the chunk sets (indices must be distinct)
/// and takes the max of the reported latencies.
PartialResult merge(const PartialResult& a, const PartialResult& b);

struct Estimate {
  double price = 0.0;
  double std_error = 0.0;
  double ci_half_width = 0.0;  // kZ95 * std_error
  std::uint64_t n = 0;
};

/// Price, standard error and 95% CI half-width from merged moments.
/// Sample variance is clamped at zero against floating-point cancellation.
/// Throws ValidationError when fewer than 2 paths are present.
Estimate estimate(const PartialResult& r);

/// Undiscounted payoff of one path. Monitoring (barrier checks, Asian
/// fixings) happens on the grid points k = 1..steps only.
double payoff(const DerivativeSpec& d, const PathSkeleton& path, double spot0);

/// Simulates n_paths paths on the stream keyed by (base_seed, task id,
/// chunk_index), accumulating discounted payoffs with compensated summation.
/// elapsed_s is measured wall time.
PartialResult run_chunk(const PricingTask& task, std::uint64_t n_paths,
                        std::uint64_t chunk_index);

StreamKey stream_key_for(const PricingTask& task, std::uint64_t chunk_index);

/// Compensated (Neumaier) accumulator.
struct KahanSum {
  double s = 0.0;
  double c = 0.0;
  void add(double x) {
    const double t = s + x;
    if (std::abs(s) >= std::abs(x)) {
      c += (s - t) + x;
    } else {
      c += (x - t) + s;
    }
    s = t;
  }
  double value() const { return s + c; }
};

}  // namespace hetmc
