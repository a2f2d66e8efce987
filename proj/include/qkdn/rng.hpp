#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "qkdn/sim_time.hpp"

namespace qkdn {

/// Independent pseudo-random stream identified by (seed, stream_id).
///
/// Every stochastic source in a run owns its own stream so that adding or
/// removing one source leaves the samples of all others unchanged. The
/// engine is mt19937_64 (bit-exact across standard libraries) and all
/// transforms to doubles are done here rather than through <random>
/// distributions, whose algorithms differ between implementations.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view stream_id);

  std::uint64_t seed() const { return seed_; }
  const std::string& id() const { return id_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, n).
  std::uint64_t index(std::uint64_t n);
  /// Exponentially distributed duration with the given mean, rounded to the
  /// nearest nanosecond. Throws ParameterError when mean <= 0.
  SimTime exponential(SimTime mean);

 private:
  std::uint64_t seed_;
  std::string id_;
  std::mt19937_64 engine_;
};

/// Stable 64-bit FNV-1a hash; used to derive stream seeds and trace digests.
std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a_u64(std::uint64_t v, std::uint64_t h);

}  // namespace qkdn
