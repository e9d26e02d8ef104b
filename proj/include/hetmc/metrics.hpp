#pragma once

#include <cstdint>
#include <vector>

#include "hetmc/platform.hpp"

namespace hetmc {

/// One online-benchmarking measurement.
struct BenchmarkObservation {
  std::uint64_t n = 0;       // paths, >= 2
  double elapsed_s = 0.0;    // wall or virtual, per platform
  double sample_std = 0.0;   // discounted-payoff sample standard deviation
};

/// Affine latency model: predicted seconds = setup_s + n / rate.
struct LatencyModel {
  double setup_s = 0.0;  // >= 0
  double rate = 0.0;     // paths per second, > 0
};

/// Monte Carlo confidence law: ci(n) = k / sqrt(n).
struct ConfidenceModel {
  double k = 0.0;  // currency * sqrt(paths), >= 0
};

/// Runs one observation per size on the platform. Chunk indices come from a
/// reserved benchmark range (top bit set) so production ranges stay
/// contiguous from 0 and benchmark runs are deterministic.
/// Requires at least 2 distinct sizes, each >= 2.
std::vector<BenchmarkObservation> benchmark(const PlatformSpec& p,
                                            const PricingTask& task,
                                            const std::vector<std::uint64_t>& sizes,
                                            std::uint64_t chunk_size = kDefaultChunkSize);

/// Least-squares fit of elapsed = a + n*b, with the intercept clamped at 0
/// and rate = 1/b. With exactly two points this is the exact solution.
/// Throws FitError when the fitted slope is not positive.
LatencyModel fit_latency(const std::vector<BenchmarkObservation>& obs);

/// k = z * sample_std, so predicted ci(n) = z * s / sqrt(n).
ConfidenceModel fit_confidence(const BenchmarkObservation& obs);

double predict_latency(const LatencyModel& m, std::uint64_t n);
double predict_ci(const ConfidenceModel& c, std::uint64_t n);

/// Smallest path count whose predicted ci meets the target:
/// ceil((k/target)^2), floored at 2. Throws on non-positive targets and on
/// demands that overflow the count type.
std::uint64_t required_paths(const ConfidenceModel& c, double ci_target);

}  // namespace hetmc
