#pragma once

#include <cstdint>
#include <string_view>

namespace hetmc {

/// Identifies one reproducible random stream. Distinct triples give
/// statistically independent streams; the same triple gives bit-identical
/// draws on every run and every platform.
struct StreamKey {
  std::uint64_t base_seed = 0;
  std::uint64_t task_id_hash = 0;
  std::uint64_t chunk_index = 0;
};

/// 64-bit FNV-1a of a task id string.
std::uint64_t fnv1a64(std::string_view s);

/// Inverse of the standard normal CDF (Wichura's AS241, double precision).
/// p must lie strictly inside (0, 1).
double inverse_normal_cdf(double p);

/// Splittable keyed generator producing i.i.d. standard normals via the
/// inverse-CDF transform: exactly one normal per underlying 64-bit draw,
/// so consumption counts are exact and streams can be split by stride.
class NormalStream {
 public:
  explicit NormalStream(const StreamKey& key);

  std::uint64_t next_u64();
  /// Uniform draw on the open interval (0, 1).
  double next_uniform();
  /// Standard normal draw.
  double next();

 private:
  std::uint64_t state_;
};

}  // namespace hetmc
