#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "hetmc/errors.hpp"
#include "hetmc/platform.hpp"

using namespace hetmc;

namespace {

PricingTask sample_task(const std::string& id = "bs", std::uint64_t seed = 31) {
  PricingTask t;
  t.id = id;
  t.underlying = BlackScholesUnderlying{100.0, 0.05, 0.2};
  t.derivative = EuropeanOption{100.0, 1.0, OptionKind::Call};
  t.steps = 4;
  t.base_seed = seed;
  return t;
}

PlatformSpec simulated(const std::string& name, double rate, double setup = 0.0) {
  return PlatformSpec{name, SimulatedSpec{rate, setup, {}}};
}

std::string read_config(const std::string& name) {
  std::ifstream in(std::string(HETMC_CONFIG_DIR) + "/" + name);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("the virtual clock is the affine formula, exactly") {
  const auto p = simulated("sim", 1e6, 0.5);
  const auto r = execute(p, sample_task(), 1'000'000, 0);
  CHECK(r.elapsed_s() == 1.5);
  CHECK(r.n() == 1'000'000);
}

TEST_CASE("moment sums are platform-invariant") {
  const auto task = sample_task();
  const PlatformSpec cpu{"local", LocalCpuSpec{4}};
  const auto sim = simulated("sim", 1e7);

  const auto a = execute(cpu, task, 200'000, 5);
  const auto b = execute(sim, task, 200'000, 5);
  CHECK(a.n() == b.n());
  CHECK(a.sum() == b.sum());
  CHECK(a.sum_sq() == b.sum_sq());
}

TEST_CASE("worker count never changes the numbers") {
  const auto task = sample_task();
  const PlatformSpec one{"w1", LocalCpuSpec{1}};
  const PlatformSpec many{"w8", LocalCpuSpec{8}};
  const auto a = execute(one, task, 300'000, 0, 32768);
  const auto b = execute(many, task, 300'000, 0, 32768);
  CHECK(a.sum() == b.sum());
  CHECK(a.sum_sq() == b.sum_sq());
}

TEST_CASE("virtual latencies scale inversely with configured rates") {
  // Rates proportional to 274.87 and 28.99; latency ratio must invert that.
  const auto fast = simulated("fast", 274.87e5);
  const auto slow = simulated("slow", 28.99e5);
  const auto task = sample_task();
  const auto rf = execute(fast, task, 500'000, 0);
  const auto rs = execute(slow, task, 500'000, 0);
  CHECK(rf.elapsed_s() / rs.elapsed_s() ==
        doctest::Approx(28.99 / 274.87).epsilon(1e-9));
}

TEST_CASE("per-task rate overrides pick the matching column") {
  SimulatedSpec sim{1e6, 0.0, {{"asian", 2e6}}};
  const PlatformSpec p{"dual", sim};
  const auto heston_like = sample_task("heston");
  const auto asian_like = sample_task("asian");
  CHECK(execute(p, heston_like, 1'000'000, 0).elapsed_s() == 1.0);
  CHECK(execute(p, asian_like, 1'000'000, 0).elapsed_s() == 0.5);
}

TEST_CASE("shipped profile registry loads with six simulated platforms") {
  const auto reg = load_registry(read_config("table1.json"));
  CHECK(reg.platforms.size() == 6);
  const auto& stratix = reg.by_name("stratix_v");
  CHECK(std::get<SimulatedSpec>(stratix.kind).rate == 27487000.0);
  CHECK(stratix.simulated_rate_for("bs_asian") == 19485000.0);
  CHECK(stratix.simulated_rate_for("heston_barrier") == 27487000.0);
  const auto& opteron = reg.by_name("opteron_6272");
  CHECK(std::get<SimulatedSpec>(opteron.kind).rate / 1e5 ==
        doctest::Approx(28.99).epsilon(1e-12));
}

TEST_CASE("registry validation names the broken field") {
  CHECK_THROWS_WITH_AS(
      load_registry(R"({"platforms": [{"name": "x", "type": "simulated", "rate": 0.0}]})"),
      doctest::Contains("rate"), ValidationError);
  CHECK_THROWS_WITH_AS(
      load_registry(R"({"platforms": [
        {"name": "x", "type": "simulated", "rate": 1.0},
        {"name": "x", "type": "local_cpu", "workers": 2}]})"),
      doctest::Contains("duplicate"), ValidationError);
  CHECK_THROWS_WITH_AS(
      load_registry(R"({"platforms": [{"name": "x", "type": "local_cpu", "workers": 0}]})"),
      doctest::Contains("workers"), ValidationError);
  CHECK_THROWS_AS(load_registry(R"({"platforms": []})"), ValidationError);
  CHECK_THROWS_AS(load_registry("nonsense"), ValidationError);
  CHECK_THROWS_AS(
      load_registry(R"({"platforms": [{"name": "x", "type": "quantum"}]})"),
      ValidationError);
}

TEST_CASE("execute validates its preconditions") {
  const auto p = simulated("sim", 1e6);
  CHECK_THROWS_AS(execute(p, sample_task(), 0, 0), ValidationError);
  CHECK_THROWS_AS(execute(p, sample_task(), 10, 0, 0), ValidationError);
}
