#include "hetmc/domain.hpp"

#include <set>
#include <sstream>

#include "hetmc/errors.hpp"
#include "json.hpp"

namespace hetmc {

using nlohmann::ordered_json;

double spot0(const UnderlyingSpec& u) {
  return std::visit([](const auto& m) { return m.spot; }, u);
}

double risk_free_rate(const UnderlyingSpec& u) {
  return std::visit([](const auto& m) { return m.rate; }, u);
}

double maturity(const DerivativeSpec& d) {
  return std::visit([](const auto& o) { return o.maturity; }, d);
}

double strike(const DerivativeSpec& d) {
  return std::visit([](const auto& o) { return o.strike; }, d);
}

namespace {

[[noreturn]] void fail(const std::string& ctx, const std::string& msg) {
  throw ValidationError(ctx.empty() ? msg : ctx + ": " + msg);
}

void check(bool ok, const std::string& ctx, const std::string& msg) {
  if (!ok) fail(ctx, msg);
}

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

void validate_task(const PricingTask& task) {
  const std::string ctx = "task '" + task.id + "'";
  check(!task.id.empty(), "task", "id must be non-empty");
  check(task.steps >= 1, ctx, "steps must be >= 1");

  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        check(m.spot > 0.0, ctx, "spot must be > 0 (got " + num(m.spot) + ")");
        if constexpr (std::is_same_v<M, BlackScholesUnderlying>) {
          check(m.volatility >= 0.0, ctx,
                "volatility must be >= 0 (got " + num(m.volatility) + ")");
        } else {
          check(m.v0 >= 0.0, ctx, "v0 must be >= 0 (got " + num(m.v0) + ")");
          check(m.kappa >= 0.0, ctx, "kappa must be >= 0 (got " + num(m.kappa) + ")");
          check(m.theta >= 0.0, ctx, "theta must be >= 0 (got " + num(m.theta) + ")");
          check(m.xi >= 0.0, ctx, "xi must be >= 0 (got " + num(m.xi) + ")");
          check(m.rho >= -1.0 && m.rho <= 1.0, ctx,
                "rho must lie in [-1, 1] (got " + num(m.rho) + ")");
        }
      },
      task.underlying);

  std::visit(
      [&](const auto& o) {
        using O = std::decay_t<decltype(o)>;
        check(o.strike > 0.0, ctx, "strike must be > 0 (got " + num(o.strike) + ")");
        check(o.maturity > 0.0, ctx,
              "maturity must be > 0 (got " + num(o.maturity) + ")");
        if constexpr (std::is_same_v<O, AsianArithmeticOption>) {
          check(o.fixings >= 1, ctx, "fixings must be >= 1");
          check(o.fixings <= task.steps, ctx,
                "fixings must not exceed steps (fixing dates lie on the step grid)");
          check(task.steps % o.fixings == 0, ctx,
                "steps must be divisible by fixings (fixing dates lie on the step grid)");
        } else if constexpr (std::is_same_v<O, BarrierKnockOutOption>) {
          check(o.barrier > 0.0, ctx,
                "barrier must be > 0 (got " + num(o.barrier) + ")");
        }
      },
      task.derivative);
}

void validate_portfolio(const Portfolio& p) {
  if (p.tasks.empty()) throw ValidationError("portfolio: task list must be non-empty");
  std::set<std::string> seen;
  for (const auto& t : p.tasks) {
    validate_task(t);
    if (!seen.insert(t.id).second) {
      throw ValidationError("portfolio: duplicate task id '" + t.id + "'");
    }
  }
}

namespace {

const ordered_json& require_field(const ordered_json& j, const char* field,
                                  const std::string& ctx) {
  auto it = j.find(field);
  if (it == j.end()) fail(ctx, std::string("missing field '") + field + "'");
  return *it;
}

double require_number(const ordered_json& j, const char* field, const std::string& ctx) {
  const auto& v = require_field(j, field, ctx);
  if (!v.is_number()) fail(ctx, std::string("field '") + field + "' must be a number");
  return v.get<double>();
}

std::string require_string(const ordered_json& j, const char* field,
                           const std::string& ctx) {
  const auto& v = require_field(j, field, ctx);
  if (!v.is_string()) fail(ctx, std::string("field '") + field + "' must be a string");
  return v.get<std::string>();
}

std::uint64_t require_count(const ordered_json& j, const char* field,
                            const std::string& ctx) {
  const auto& v = require_field(j, field, ctx);
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    fail(ctx, std::string("field '") + field + "' must be an integer");
  }
  if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0) {
    fail(ctx, std::string("field '") + field + "' must be >= 0");
  }
  return v.get<std::uint64_t>();
}

std::uint64_t require_seed(const ordered_json& j, const char* field,
                           const std::string& ctx) {
  const auto& v = require_field(j, field, ctx);
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    fail(ctx, std::string("field '") + field + "' must be an integer");
  }
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  return static_cast<std::uint64_t>(v.get<std::int64_t>());
}

OptionKind parse_kind(const ordered_json& j, const std::string& ctx) {
  const std::string s = require_string(j, "kind", ctx);
  if (s == "call") return OptionKind::Call;
  if (s == "put") return OptionKind::Put;
  fail(ctx, "field 'kind' must be \"call\" or \"put\" (got \"" + s + "\")");
}

UnderlyingSpec parse_underlying(const ordered_json& j, const std::string& ctx) {
  if (!j.is_object()) fail(ctx, "field 'underlying' must be an object");
  const std::string type = require_string(j, "type", ctx);
  if (type == "black_scholes") {
    BlackScholesUnderlying u;
    u.spot = require_number(j, "spot", ctx);
    u.rate = require_number(j, "rate", ctx);
    u.volatility = require_number(j, "volatility", ctx);
    return u;
  }
  if (type == "heston") {
    HestonUnderlying u;
    u.spot = require_number(j, "spot", ctx);
    u.rate = require_number(j, "rate", ctx);
    u.v0 = require_number(j, "v0", ctx);
    u.kappa = require_number(j, "kappa", ctx);
    u.theta = require_number(j, "theta", ctx);
    u.xi = require_number(j, "xi", ctx);
    u.rho = require_number(j, "rho", ctx);
    return u;
  }
  fail(ctx, "unknown underlying type \"" + type + "\"");
}

DerivativeSpec parse_derivative(const ordered_json& j, const std::string& ctx) {
  if (!j.is_object()) fail(ctx, "field 'derivative' must be an object");
  const std::string type = require_string(j, "type", ctx);
  if (type == "european") {
    EuropeanOption o;
    o.strike = require_number(j, "strike", ctx);
    o.maturity = require_number(j, "maturity", ctx);
    o.kind = parse_kind(j, ctx);
    return o;
  }
  if (type == "asian_arithmetic") {
    AsianArithmeticOption o;
    o.strike = require_number(j, "strike", ctx);
    o.maturity = require_number(j, "maturity", ctx);
    const std::uint64_t fixings = require_count(j, "fixings", ctx);
    if (fixings == 0 || fixings > 0xffffffffull) fail(ctx, "fixings must be >= 1");
    o.fixings = static_cast<std::uint32_t>(fixings);
    o.kind = parse_kind(j, ctx);
    return o;
  }
  if (type == "barrier_knock_out") {
    BarrierKnockOutOption o;
    o.strike = require_number(j, "strike", ctx);
    o.maturity = require_number(j, "maturity", ctx);
    o.barrier = require_number(j, "barrier", ctx);
    const std::string dir = require_string(j, "direction", ctx);
    if (dir == "up") {
      o.direction = BarrierDirection::Up;
    } else if (dir == "down") {
      o.direction = BarrierDirection::Down;
    } else {
      fail(ctx, "field 'direction' must be \"up\" or \"down\" (got \"" + dir + "\")");
    }
    o.kind = parse_kind(j, ctx);
    return o;
  }
  fail(ctx, "unknown derivative type \"" + type + "\"");
}

ordered_json kind_json(OptionKind k) {
  return k == OptionKind::Call ? "call" : "put";
}

ordered_json underlying_json(const UnderlyingSpec& u) {
  ordered_json j;
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, BlackScholesUnderlying>) {
          j["type"] = "black_scholes";
          j["spot"] = m.spot;
          j["rate"] = m.rate;
          j["volatility"] = m.volatility;
        } else {
          j["type"] = "heston";
          j["spot"] = m.spot;
          j["rate"] = m.rate;
          j["v0"] = m.v0;
          j["kappa"] = m.kappa;
          j["theta"] = m.theta;
          j["xi"] = m.xi;
          j["rho"] = m.rho;
        }
      },
      u);
  return j;
}

ordered_json derivative_json(const DerivativeSpec& d) {
  ordered_json j;
  std::visit(
      [&](const auto& o) {
        using O = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<O, EuropeanOption>) {
          j["type"] = "european";
          j["strike"] = o.strike;
          j["maturity"] = o.maturity;
          j["kind"] = kind_json(o.kind);
        } else if constexpr (std::is_same_v<O, AsianArithmeticOption>) {
          j["type"] = "asian_arithmetic";
          j["strike"] = o.strike;
          j["maturity"] = o.maturity;
          j["fixings"] = o.fixings;
          j["kind"] = kind_json(o.kind);
        } else {
          j["type"] = "barrier_knock_out";
          j["strike"] = o.strike;
          j["maturity"] = o.maturity;
          j["barrier"] = o.barrier;
          j["direction"] = o.direction == BarrierDirection::Up ? "up" : "down";
          j["kind"] = kind_json(o.kind);
        }
      },
      d);
  return j;
}

}  // namespace

Portfolio parse_task_file(const std::string& text) {
  ordered_json root;
  try {
    root = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("task file: ") + e.what());
  }
  if (!root.is_object()) throw ValidationError("task file: top level must be an object");
  const auto& tasks = require_field(root, "tasks", "task file");
  if (!tasks.is_array()) throw ValidationError("task file: 'tasks' must be an array");

  Portfolio p;
  for (const auto& jt : tasks) {
    if (!jt.is_object()) throw ValidationError("task file: each task must be an object");
    PricingTask t;
    t.id = require_string(jt, "id", "task");
    const std::string ctx = "task '" + t.id + "'";
    t.underlying = parse_underlying(require_field(jt, "underlying", ctx), ctx);
    t.derivative = parse_derivative(require_field(jt, "derivative", ctx), ctx);
    const std::uint64_t steps = require_count(jt, "steps", ctx);
    if (steps == 0 || steps > 0xffffffffull) fail(ctx, "steps must be >= 1");
    t.steps = static_cast<std::uint32_t>(steps);
    t.base_seed = require_seed(jt, "base_seed", ctx);
    p.tasks.push_back(std::move(t));
  }
  validate_portfolio(p);
  return p;
}

std::string serialize_portfolio(const Portfolio& p) {
  validate_portfolio(p);
  ordered_json root;
  root["tasks"] = ordered_json::array();
  for (const auto& t : p.tasks) {
    ordered_json jt;
    jt["id"] = t.id;
    jt["underlying"] = underlying_json(t.underlying);
    jt["derivative"] = derivative_json(t.derivative);
    jt["steps"] = t.steps;
    jt["base_seed"] = t.base_seed;
    root["tasks"].push_back(std::move(jt));
  }
  return root.dump(2) + "\n";
}

bool operator==(const PricingTask& a, const PricingTask& b) {
  if (a.id != b.id || a.steps != b.steps || a.base_seed != b.base_seed) return false;
  if (a.underlying.index() != b.underlying.index()) return false;
  if (a.derivative.index() != b.derivative.index()) return false;
  const bool under_eq = std::visit(
      [&](const auto& ua) {
        using U = std::decay_t<decltype(ua)>;
        const auto& ub = std::get<U>(b.underlying);
        if constexpr (std::is_same_v<U, BlackScholesUnderlying>) {
          return ua.spot == ub.spot && ua.rate == ub.rate &&
                 ua.volatility == ub.volatility;
        } else {
          return ua.spot == ub.spot && ua.rate == ub.rate && ua.v0 == ub.v0 &&
                 ua.kappa == ub.kappa && ua.theta == ub.theta && ua.xi == ub.xi &&
                 ua.rho == ub.rho;
        }
      },
      a.underlying);
  if (!under_eq) return false;
  return std::visit(
      [&](const auto& da) {
        using D = std::decay_t<decltype(da)>;
        const auto& db = std::get<D>(b.derivative);
        if constexpr (std::is_same_v<D, EuropeanOption>) {
          return da.strike == db.strike && da.maturity == db.maturity &&
                 da.kind == db.kind;
        } else if constexpr (std::is_same_v<D, AsianArithmeticOption>) {
          return da.strike == db.strike && da.maturity == db.maturity &&
                 da.fixings == db.fixings && da.kind == db.kind;
        } else {
          return da.strike == db.strike && da.maturity == db.maturity &&
                 da.barrier == db.barrier && da.direction == db.direction &&
                 da.kind == db.kind;
        }
      },
      a.derivative);
}

bool operator==(const Portfolio& a, const Portfolio& b) { return a.tasks == b.tasks; }

}  // namespace hetmc
