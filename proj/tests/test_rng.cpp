#include <doctest.h>

#include <cmath>

#include "qkdn/errors.hpp"
#include "qkdn/rng.hpp"

using namespace qkdn;

TEST_CASE("exponential sample mean is within 2% of the configured mean") {
  RngStream rng(42, "backoff/test");
  const int n = 100000;
  long double sum = 0;
  for (int i = 0; i < n; ++i) sum += rng.exponential(seconds(3)).ns();
  const double mean_s = static_cast<double>(sum / n) / 1e9;
  CHECK(std::fabs(mean_s - 3.0) / 3.0 < 0.02);
}

TEST_CASE("exponential rejects a non-positive mean") {
  RngStream rng(1, "x");
  CHECK_THROWS_AS(rng.exponential(SimTime::zero()), ParameterError);
  CHECK_THROWS_AS(rng.exponential(SimTime{-5}), ParameterError);
}

TEST_CASE("streams are reproducible and independent by id") {
  RngStream a(7, "qkd/0");
  RngStream b(7, "qkd/0");
  RngStream c(7, "qkd/1");
  RngStream d(8, "qkd/0");
  int same_c = 0, same_d = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    same_c += x == c.next_u64();
    same_d += x == d.next_u64();
  }
  CHECK(same_c == 0);
  CHECK(same_d == 0);
}

TEST_CASE("uniform and index stay in range") {
  RngStream rng(3, "range");
  double lo = 1, hi = 0;
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(rng.index(7) < 7);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("fnv1a matches the published test vectors") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
}
