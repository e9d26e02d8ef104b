#include <cmath>

#include "doctest.h"
#include "hetmc/errors.hpp"
#include "hetmc/metrics.hpp"

using namespace hetmc;

namespace {

PricingTask sample_task(std::uint32_t steps = 4, std::uint64_t seed = 17) {
  PricingTask t;
  t.id = "bs";
  t.underlying = BlackScholesUnderlying{100.0, 0.05, 0.2};
  t.derivative = EuropeanOption{100.0, 1.0, OptionKind::Call};
  t.steps = steps;
  t.base_seed = seed;
  return t;
}

PlatformSpec simulated(double rate, double setup = 0.0) {
  return PlatformSpec{"sim", SimulatedSpec{rate, setup, {}}};
}

}  // namespace

TEST_CASE("benchmark on a virtual platform is exact") {
  const auto obs = benchmark(simulated(1e6, 1.0), sample_task(), {10'000, 100'000});
  REQUIRE(obs.size() == 2);
  CHECK(obs[0].n == 10'000);
  CHECK(obs[0].elapsed_s == 1.01);
  CHECK(obs[1].elapsed_s == 1.1);
  CHECK(obs[0].sample_std > 0.0);
}

TEST_CASE("benchmark insists on two distinct sizes of at least two paths") {
  CHECK_THROWS_AS(benchmark(simulated(1e6), sample_task(), {10'000}),
                  ValidationError);
  CHECK_THROWS_AS(benchmark(simulated(1e6), sample_task(), {10'000, 10'000}),
                  ValidationError);
  CHECK_THROWS_AS(benchmark(simulated(1e6), sample_task(), {1, 10'000}),
                  ValidationError);
}

TEST_CASE("benchmark sample stds agree across sizes") {
  const PlatformSpec cpu{"local", LocalCpuSpec{2}};
  const auto obs = benchmark(cpu, sample_task(), {10'000, 100'000});
  CHECK(obs[0].sample_std ==
        doctest::Approx(obs[1].sample_std).epsilon(0.20));
}

TEST_CASE("two-point latency fit is exact on affine data") {
  const auto model = fit_latency({{10'000, 1.01, 1.0}, {100'000, 1.1, 1.0}});
  CHECK(model.setup_s == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(model.rate == doctest::Approx(1e6).epsilon(1e-9));
}

TEST_CASE("fits on a virtual platform recover its parameters to 1e-9") {
  for (double setup : {0.0, 0.25, 2.0}) {
    for (double rate : {953000.0, 27487000.0, 42163000.0}) {
      const auto obs =
          benchmark(simulated(rate, setup), sample_task(), {16384, 65536});
      const auto model = fit_latency(obs);
      CHECK(model.rate == doctest::Approx(rate).epsilon(1e-9));
      CHECK(std::fabs(model.setup_s - setup) <= 1e-9 * std::max(1.0, setup));
    }
  }
}

TEST_CASE("decreasing latencies are a degenerate fit") {
  CHECK_THROWS_AS(fit_latency({{10'000, 2.0, 1.0}, {100'000, 1.0, 1.0}}), FitError);
  CHECK_THROWS_AS(fit_latency({{10'000, 1.0, 1.0}, {100'000, 1.0, 1.0}}), FitError);
  CHECK_THROWS_AS(fit_latency({{10'000, 1.0, 1.0}}), ValidationError);
}

TEST_CASE("negative intercepts clamp to zero") {
  // True line: -0.5 + n/1e6; the fit keeps the slope but clamps the setup.
  const auto model = fit_latency({{1'000'000, 0.5, 1.0}, {2'000'000, 1.5, 1.0}});
  CHECK(model.setup_s == 0.0);
  CHECK(model.rate == doctest::Approx(1e6).epsilon(1e-9));
}

TEST_CASE("confidence fit is z times the sample std") {
  CHECK(fit_confidence({1000, 1.0, 0.0}).k == 0.0);
  CHECK(fit_confidence({1000, 1.0, 10.0}).k == doctest::Approx(19.59964).epsilon(1e-12));
  CHECK_THROWS_AS(fit_confidence({1, 1.0, 1.0}), ValidationError);
}

TEST_CASE("latency prediction is affine in n") {
  const LatencyModel m{0.75, 2e6};
  CHECK(predict_latency(m, 0) == 0.75);
  for (std::uint64_t n : {1000ull, 50'000ull, 3'000'000ull}) {
    CHECK(predict_latency(m, 2 * n) - predict_latency(m, n) ==
          doctest::Approx(static_cast<double>(n) / 2e6).epsilon(1e-12));
  }
  // Strictly increasing.
  CHECK(predict_latency(m, 1001) > predict_latency(m, 1000));
}

TEST_CASE("required paths inverts the confidence law") {
  CHECK(required_paths(ConfidenceModel{100.0}, 1.0) == 10'000);
  CHECK(required_paths(ConfidenceModel{100.0}, 0.5) == 40'000);
  CHECK(required_paths(ConfidenceModel{0.0}, 0.1) == 2);
  CHECK(required_paths(ConfidenceModel{1.0}, 100.0) == 2);  // floor
  CHECK_THROWS_AS(required_paths(ConfidenceModel{1.0}, 0.0), ValidationError);
  CHECK_THROWS_AS(required_paths(ConfidenceModel{1.0}, -1.0), ValidationError);
  CHECK_THROWS_AS(required_paths(ConfidenceModel{1.0}, 1e-12), InfeasibleError);
}

TEST_CASE("predicted ci at the required count meets the target") {
  const ConfidenceModel c{37.5};
  for (double target = 1e-3; target < 40.0; target *= 3.1) {
    const std::uint64_t n = required_paths(c, target);
    CHECK(predict_ci(c, n) <= target * (1.0 + 1e-12));
  }
  // Non-increasing in the target.
  CHECK(required_paths(c, 0.1) >= required_paths(c, 0.2));
}

TEST_CASE("confidence prediction extrapolates to a million paths") {
  const auto task = sample_task(1, 2025);
  const PlatformSpec cpu{"local", LocalCpuSpec{4}};
  const auto obs = benchmark(cpu, task, {16384, 65536});
  const auto conf = fit_confidence(obs[1]);

  // Independent realized run at 1e6 paths (production chunk range).
  const auto big = execute(cpu, task, 1'000'000, 0);
  const double n = static_cast<double>(big.n());
  const double var =
      std::max(0.0, (big.sum_sq() - big.sum() * big.sum() / n) / (n - 1.0));
  const double realized = kZ95 * std::sqrt(var / n);
  CHECK(predict_ci(conf, 1'000'000) == doctest::Approx(realized).epsilon(0.15));
}
