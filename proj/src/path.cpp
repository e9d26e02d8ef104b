#include "hetmc/path.hpp"

#include <cmath>

namespace hetmc {

namespace {

void simulate_black_scholes(const BlackScholesUnderlying& u, double maturity,
                            std::uint32_t steps, NormalStream& stream,
                            PathSkeleton& out) {
  const double dt = maturity / steps;
  const double var = u.volatility * u.volatility;
  const double drift = (u.rate - 0.5 * var) * dt;
  const double vol_step = std::sqrt(var * dt);
  double s = u.spot;
  for (std::uint32_t k = 0; k < steps; ++k) {
    s *= std::exp(drift + vol_step * stream.next());
    out.spots[k] = s;
  }
}

void simulate_heston(const HestonUnderlying& u, double maturity, std::uint32_t steps,
                     NormalStream& stream, PathSkeleton& out) {
  const double dt = maturity / steps;
  const double rho_perp = std::sqrt(1.0 - u.rho * u.rho);
  double s = u.spot;
  double v = u.v0;
  for (std::uint32_t k = 0; k < steps; ++k) {
    const double z_s = stream.next();
    const double z_perp = stream.next();
    const double z_v = u.rho * z_s + rho_perp * z_perp;
    const double v_pos = v > 0.0 ? v : 0.0;  // full truncation
    s *= std::exp((u.rate - 0.5 * v_pos) * dt + std::sqrt(v_pos * dt) * z_s);
    v += u.kappa * (u.theta - v_pos) * dt + u.xi * std::sqrt(v_pos * dt) * z_v;
    out.spots[k] = s;
  }
}

}  // namespace

void simulate_path(const UnderlyingSpec& u, double maturity, std::uint32_t steps,
                   NormalStream& stream, PathSkeleton& out) {
  out.spots.resize(steps);
  if (const auto* bs = std::get_if<BlackScholesUnderlying>(&u)) {
    simulate_black_scholes(*bs, maturity, steps, stream, out);
  } else {
    simulate_heston(std::get<HestonUnderlying>(u), maturity, steps, stream, out);
  }
}

PathSkeleton simulate_path(const UnderlyingSpec& u, double maturity,
                           std::uint32_t steps, NormalStream& stream) {
  PathSkeleton out;
  simulate_path(u, maturity, steps, stream, out);
  return out;
}

}  // namespace hetmc
