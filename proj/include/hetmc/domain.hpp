#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace hetmc {

enum class OptionKind { Call, Put };
enum class BarrierDirection { Up, Down };

/// Geometric Brownian motion underlying with constant volatility.
struct BlackScholesUnderlying {
  double spot = 0.0;        // currency, > 0
  double rate = 0.0;        // continuously compounded, per annum
  double volatility = 0.0;  // per sqrt(annum), >= 0
};

/// Stochastic-volatility underlying: mean-reverting square-root variance
/// correlated with the spot.
struct HestonUnderlying {
  double spot = 0.0;   // currency, > 0
  double rate = 0.0;   // continuously compounded, per annum
  double v0 = 0.0;     // initial variance, >= 0
  double kappa = 0.0;  // mean-reversion speed, >= 0
  double theta = 0.0;  // long-run variance, >= 0
  double xi = 0.0;     // volatility of variance, >= 0
  double rho = 0.0;    // spot/variance correlation, in [-1, 1]
};

using UnderlyingSpec = std::variant<BlackScholesUnderlying, HestonUnderlying>;

struct EuropeanOption {
  double strike = 0.0;
  double maturity = 0.0;  // years, > 0
  OptionKind kind = OptionKind::Call;
};

struct AsianArithmeticOption {
  double strike = 0.0;
  double maturity = 0.0;
  std::uint32_t fixings = 1;  // equally spaced grid points ending at maturity
  OptionKind kind = OptionKind::Call;
};

struct BarrierKnockOutOption {
  double strike = 0.0;
  double maturity = 0.0;
  double barrier = 0.0;
  BarrierDirection direction = BarrierDirection::Up;
  OptionKind kind = OptionKind::Call;
};

using DerivativeSpec =
    std::variant<EuropeanOption, AsianArithmeticOption, BarrierKnockOutOption>;

/// One derivative on one underlying plus simulation settings; the unit of
/// partitionable work. Immutable after construction, safe to share across
/// concurrent executors.
struct PricingTask {
  std::string id;
  UnderlyingSpec underlying;
  DerivativeSpec derivative;
  std::uint32_t steps = 1;  // time grid per path; also the monitoring/fixing grid
  std::uint64_t base_seed = 0;
};

struct Portfolio {
  std::vector<PricingTask> tasks;
};

double spot0(const UnderlyingSpec& u);
double risk_free_rate(const UnderlyingSpec& u);
double maturity(const DerivativeSpec& d);
double strike(const DerivativeSpec& d);

/// Throws ValidationError naming the offending field (and task id where known).
void validate_task(const PricingTask& task);
void validate_portfolio(const Portfolio& p);

/// Parses the JSON task format. Throws ValidationError on malformed text or
/// any violated invariant.
Portfolio parse_task_file(const std::string& text);

/// Inverse of parse_task_file; refuses an empty portfolio.
std::string serialize_portfolio(const Portfolio& p);

bool operator==(const PricingTask& a, const PricingTask& b);
bool operator==(const Portfolio& a, const Portfolio& b);

}  // namespace hetmc
