#pragma once

#include <cstdint>
#include <vector>

#include "hetmc/domain.hpp"
#include "hetmc/rng.hpp"

namespace hetmc {

/// One simulated trajectory: S(t_k) at the grid points t_k = k*T/steps,
/// k = 1..steps. The initial spot is not stored.
struct PathSkeleton {
  std::vector<double> spots;
};

/// Simulates one path into `out` (resized to `steps`).
///
/// Black-Scholes uses the exact log-Euler step and consumes exactly `steps`
/// normals. Heston uses full-truncation Euler and consumes exactly 2*steps
/// normals, drawn as (Z_s, Z_perp) pairs with Z_v = rho*Z_s +
/// sqrt(1-rho^2)*Z_perp.
void simulate_path(const UnderlyingSpec& u, double maturity, std::uint32_t steps,
                   NormalStream& stream, PathSkeleton& out);

PathSkeleton simulate_path(const UnderlyingSpec& u, double maturity,
                           std::uint32_t steps, NormalStream& stream);

}  // namespace hetmc
