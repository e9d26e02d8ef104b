#include "hetmc/metrics.hpp"

#include <cmath>
#include <set>

#include "hetmc/errors.hpp"

namespace hetmc {

namespace {

// Each benchmark run gets its own slice of the reserved chunk namespace so
// runs never overlap whatever production or other benchmarks consumed.
constexpr std::uint64_t kBenchmarkRunStride = 1ull << 32;

double sample_std_of(const PartialResult& r) {
  const double n = static_cast<double>(r.n());
  const double sum = r.sum();
  const double var = std::max(0.0, (r.sum_sq() - sum * sum / n) / (n - 1.0));
  return std::sqrt(var);
}

}  // namespace

std::vector<BenchmarkObservation> benchmark(const PlatformSpec& p,
                                            const PricingTask& task,
                                            const std::vector<std::uint64_t>& sizes,
                                            std::uint64_t chunk_size) {
  std::set<std::uint64_t> distinct(sizes.begin(), sizes.end());
  if (distinct.size() < 2) {
    throw ValidationError("benchmark: needs at least 2 distinct sizes");
  }
  for (std::uint64_t n : sizes) {
    if (n < 2) throw ValidationError("benchmark: every size must be >= 2");
  }
  std::vector<BenchmarkObservation> obs;
  obs.reserve(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const std::uint64_t first_chunk = kBenchmarkChunkBit | (i * kBenchmarkRunStride);
    const PartialResult r = execute(p, task, sizes[i], first_chunk, chunk_size);
    obs.push_back({sizes[i], r.elapsed_s(), sample_std_of(r)});
  }
  return obs;
}

LatencyModel fit_latency(const std::vector<BenchmarkObservation>& obs) {
  std::set<std::uint64_t> distinct;
  for (const auto& o : obs) distinct.insert(o.n);
  if (distinct.size() < 2) {
    throw ValidationError("fit_latency: needs at least 2 distinct path counts");
  }
  const double m = static_cast<double>(obs.size());
  double mean_n = 0.0, mean_e = 0.0;
  for (const auto& o : obs) {
    mean_n += static_cast<double>(o.n);
    mean_e += o.elapsed_s;
  }
  mean_n /= m;
  mean_e /= m;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& o : obs) {
    const double dn = static_cast<double>(o.n) - mean_n;
    sxx += dn * dn;
    sxy += dn * (o.elapsed_s - mean_e);
  }
  const double b = sxy / sxx;
  if (!(b > 0.0)) {
    throw FitError("fit_latency: non-increasing latency observations (slope " +
                   std::to_string(b) + ")");
  }
  LatencyModel model;
  model.setup_s = std::max(0.0, mean_e - b * mean_n);
  model.rate = 1.0 / b;
  return model;
}

ConfidenceModel fit_confidence(const BenchmarkObservation& obs) {
  if (obs.n < 2) throw ValidationError("fit_confidence: observation needs n >= 2");
  return ConfidenceModel{kZ95 * obs.sample_std};
}

double predict_latency(const LatencyModel& m, std::uint64_t n) {
  return m.setup_s + static_cast<double>(n) / m.rate;
}

double predict_ci(const ConfidenceModel& c, std::uint64_t n) {
  return c.k / std::sqrt(static_cast<double>(n));
}

std::uint64_t required_paths(const ConfidenceModel& c, double ci_target) {
  if (!(ci_target > 0.0)) {
    throw ValidationError("required_paths: ci_target must be > 0");
  }
  if (c.k == 0.0) return 2;
  const double q = c.k / ci_target;
  const double n = std::ceil(q * q);
  if (!(n < 9.0e18)) {
    throw InfeasibleError("required_paths: demand for ci_target " +
                          std::to_string(ci_target) + " overflows the count type");
  }
  return std::max<std::uint64_t>(2, static_cast<std::uint64_t>(n));
}

}  // namespace hetmc
