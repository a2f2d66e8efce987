#include "qkdn/rng.hpp"

#include <cmath>
#include <limits>

#include "qkdn/errors.hpp"

namespace qkdn {

std::uint64_t fnv1a(std::string_view s, std::uint64_t h) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a_u64(std::uint64_t v, std::uint64_t h) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffU;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::string_view stream_id)
    : seed_(seed), id_(stream_id), engine_(splitmix64(seed ^ fnv1a(stream_id))) {}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::index(std::uint64_t n) {
  if (n == 0) throw ParameterError("RngStream::index: empty range");
  // Rejection sampling keeps the result unbiased and platform independent.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

SimTime RngStream::exponential(SimTime mean) {
  if (mean <= SimTime::zero()) throw ParameterError("exponential: mean must be positive");
  const double u = uniform();
  return SimTime::from_ns(-static_cast<double>(mean.ns()) * std::log1p(-u));
}

}  // namespace qkdn
