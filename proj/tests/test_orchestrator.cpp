#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "hetmc/errors.hpp"
#include "hetmc/orchestrate.hpp"
#include "oracles.hpp"

using namespace hetmc;

namespace {

std::string read_config(const std::string& name) {
  std::ifstream in(std::string(HETMC_CONFIG_DIR) + "/" + name);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// steps defaults high enough that local-cpu benchmark timings are dominated
// by path work rather than thread-spawn noise.
Portfolio bs_portfolio(std::uint64_t seed = 4242, std::uint32_t steps = 16) {
  Portfolio p;
  PricingTask t;
  t.id = "bs_euro_call";
  t.underlying = BlackScholesUnderlying{100.0, 0.05, 0.2};
  t.derivative = EuropeanOption{100.0, 1.0, OptionKind::Call};
  t.steps = steps;
  t.base_seed = seed;
  p.tasks.push_back(t);
  return p;
}

PlatformRegistry twin_registry(double rate) {
  PlatformRegistry reg;
  reg.platforms.push_back({"sim_a", SimulatedSpec{rate, 0.0, {}}});
  reg.platforms.push_back({"sim_b", SimulatedSpec{rate, 0.0, {}}});
  return reg;
}

}  // namespace

TEST_CASE("end-to-end run on the local cpu matches the analytic price") {
  const Portfolio portfolio = bs_portfolio();
  PlatformRegistry reg;
  reg.platforms.push_back({"local", LocalCpuSpec{4}});

  RunOptions options;
  const ModelSet models = fit_models(portfolio, reg, options);
  // Target: twice the model ci at 1e4 paths.
  const TargetVector targets{{2.0 * predict_ci(models.confidence[0], 10'000)}};
  const RunReport report = run_with_models(portfolio, reg, targets, models, options);

  REQUIRE(report.tasks.size() == 1);
  const auto& task = report.tasks[0];
  const double oracle = oracles::black_scholes(true, 100.0, 100.0, 0.05, 0.2, 1.0);
  CHECK(std::fabs(task.price - oracle) < 3.0 * task.ci_half_width);
  CHECK(task.ci_half_width <= 1.2 * task.ci_target);
  CHECK(task.paths_total >= task.path_demand);
  CHECK(report.clock_domain == "wall");
}

TEST_CASE("equal twins get path counts within one chunk of each other") {
  const Portfolio portfolio = bs_portfolio(4242, 1);
  const PlatformRegistry reg = twin_registry(1e6);
  RunOptions options;
  options.chunk_size = 4096;
  const TargetVector targets{{0.02}};
  const RunReport report = run(portfolio, reg, targets, options);

  REQUIRE(report.tasks.size() == 1);
  REQUIRE(report.tasks[0].shards.size() == 2);
  const auto& s0 = report.tasks[0].shards[0];
  const auto& s1 = report.tasks[0].shards[1];
  CHECK(std::llabs(static_cast<long long>(s0.paths) -
                   static_cast<long long>(s1.paths)) <=
        static_cast<long long>(options.chunk_size));
  CHECK(report.clock_domain == "virtual");
}

TEST_CASE("virtual shard latencies equal the model predictions") {
  const Portfolio portfolio = parse_task_file(read_config("portfolio.json"));
  const PlatformRegistry reg = load_registry(read_config("table1.json"));
  RunOptions options;
  const ModelSet models = fit_models(portfolio, reg, options);
  const TargetVector targets{{0.05, 0.05}};
  const RunReport report = run_with_models(portfolio, reg, targets, models, options);

  for (std::size_t t = 0; t < report.tasks.size(); ++t) {
    for (const auto& shard : report.tasks[t].shards) {
      CHECK(shard.virtual_clock);
      std::size_t p = 0;
      while (models.platform_names[p] != shard.platform) ++p;
      const double predicted = predict_latency(models.latency[p][t], shard.paths);
      CHECK(shard.latency_s == doctest::Approx(predicted).epsilon(1e-6));
    }
  }
}

TEST_CASE("simulated runs are reproducible bit for bit") {
  const Portfolio portfolio = parse_task_file(read_config("portfolio.json"));
  const PlatformRegistry reg = load_registry(read_config("table1.json"));
  RunOptions options;
  const TargetVector targets{{0.1, 0.1}};
  const auto a = report_to_json(run(portfolio, reg, targets, options)).dump();
  const auto b = report_to_json(run(portfolio, reg, targets, options)).dump();
  CHECK(a == b);
}

TEST_CASE("merged moments equal a single-platform run over the same chunks") {
  const Portfolio portfolio = bs_portfolio(4242, 1);
  const PlatformRegistry reg = twin_registry(2e6);
  RunOptions options;
  const TargetVector targets{{0.01}};
  const RunReport report = run(portfolio, reg, targets, options);

  REQUIRE(report.tasks.size() == 1);
  std::uint64_t total_chunks = 0;
  for (const auto& shard : report.tasks[0].shards) total_chunks += shard.chunks;

  // Re-run the whole chunk range on one platform and compare the estimate.
  const auto whole = execute(reg.platforms[0], portfolio.tasks[0],
                             total_chunks * options.chunk_size, 0, options.chunk_size);
  const Estimate e = estimate(whole);
  CHECK(e.price == report.tasks[0].price);
  CHECK(e.std_error == report.tasks[0].std_error);
  CHECK(e.n == report.tasks[0].paths_total);
}

TEST_CASE("mixed registries report both clock domains") {
  const Portfolio portfolio = bs_portfolio();
  PlatformRegistry reg;
  reg.platforms.push_back({"local", LocalCpuSpec{2}});
  reg.platforms.push_back({"sim", SimulatedSpec{1e7, 0.0, {}}});
  const TargetVector targets{{0.05}};
  const RunReport report = run(portfolio, reg, targets);
  CHECK(report.clock_domain == "mixed");
  const auto j = report_to_json(report);
  CHECK(j.contains("wall_makespan_s"));
  CHECK(j.contains("virtual_makespan_s"));
  CHECK(!j.contains("makespan_s"));
}

TEST_CASE("tradeoff selection by index and by latency bound") {
  std::vector<FrontierPoint> points(3);
  points[0].makespan_s = 10.0;
  points[0].targets = TargetVector{{0.01}};
  points[1].makespan_s = 4.0;
  points[1].targets = TargetVector{{0.02}};
  points[2].makespan_s = 1.0;
  points[2].targets = TargetVector{{0.04}};

  CHECK(select_by_index(points, 0).ci_targets[0] == 0.01);
  CHECK(select_by_index(points, 2).ci_targets[0] == 0.04);
  CHECK_THROWS_AS(select_by_index(points, 3), ValidationError);

  // A bound above every makespan selects the tightest point.
  CHECK(select_by_latency_bound(points, 100.0).ci_targets[0] == 0.01);
  CHECK(select_by_latency_bound(points, 5.0).ci_targets[0] == 0.02);
  CHECK(select_by_latency_bound(points, 1.0).ci_targets[0] == 0.04);
  CHECK_THROWS_AS(select_by_latency_bound(points, 0.5), InfeasibleError);
  CHECK_THROWS_AS(select_by_latency_bound({}, 1.0), ValidationError);
}

TEST_CASE("infeasible targets surface as InfeasibleError") {
  const Portfolio portfolio = bs_portfolio();
  const PlatformRegistry reg = twin_registry(1e6);
  CHECK_THROWS_AS(run(portfolio, reg, TargetVector{{1e-12}}), InfeasibleError);
}

TEST_CASE("achieved ci stays within 1.2x target across the shipped portfolio") {
  const Portfolio portfolio = parse_task_file(read_config("portfolio.json"));
  const PlatformRegistry reg = load_registry(read_config("table1.json"));
  const TargetVector targets{{0.05, 0.03}};
  const RunReport report = run(portfolio, reg, targets);
  for (const auto& t : report.tasks) {
    CHECK(t.ci_half_width <= 1.2 * t.ci_target);
    CHECK(t.paths_total >= t.path_demand);
  }
}

TEST_CASE("model mismatches are rejected") {
  const Portfolio portfolio = bs_portfolio();
  const PlatformRegistry reg = twin_registry(1e6);
  ModelSet wrong = fit_models(portfolio, reg);
  wrong.task_ids[0] = "other";
  CHECK_THROWS_AS(
      run_with_models(portfolio, reg, TargetVector{{0.05}}, wrong),
      ValidationError);
}
