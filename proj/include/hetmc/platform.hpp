#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "hetmc/domain.hpp"
#include "hetmc/engine.hpp"

namespace hetmc {

/// Real local backend: chunks run across `workers` threads and latency is
/// measured wall time.
struct LocalCpuSpec {
  unsigned workers = 1;
};

/// Simulated accelerator profile. The numeric work is delegated to the
/// local kernel (results are real); latency is a virtual clock reading
/// setup_s + n/rate that never touches the wall clock.
struct SimulatedSpec {
  double rate = 0.0;     // paths per second, > 0
  double setup_s = 0.0;  // per-invocation fixed charge, >= 0
  /// Optional per-task rate overrides, keyed by task id.
  std::map<std::string, double> task_rates;
};

struct PlatformSpec {
  std::string name;
  std::variant<LocalCpuSpec, SimulatedSpec> kind;

  bool is_simulated() const { return std::holds_alternative<SimulatedSpec>(kind); }
  /// Effective simulated path rate for a task (override or base rate).
  double simulated_rate_for(const std::string& task_id) const;
};

struct PlatformRegistry {
  std::vector<PlatformSpec> platforms;

  const PlatformSpec& by_name(const std::string& name) const;
};

void validate_registry(const PlatformRegistry& r);

/// Parses the JSON platform format. Throws ValidationError naming the field.
PlatformRegistry load_registry(const std::string& text);

/// Runs n_paths paths of `task` on platform `p`, covering the contiguous
/// chunk range starting at first_chunk. Moment sums depend only on
/// (task, chunk range), never on the platform that ran them.
PartialResult execute(const PlatformSpec& p, const PricingTask& task,
                      std::uint64_t n_paths, std::uint64_t first_chunk,
                      std::uint64_t chunk_size = kDefaultChunkSize);

}  // namespace hetmc
