#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "qkdn/cbr.hpp"
#include "qkdn/errors.hpp"
#include "qkdn/rng.hpp"

using namespace qkdn;

namespace {

struct Oracle {
  std::uint64_t tx = 0, rx = 0, samples = 0;
  long double latency_ns = 0;
};

/// Packet-by-packet reference: packet k is created at start + k*I, starts
/// encryption at the first instant >= max(created, stage free) that lies
/// inside an activity window and before `end`, departs after `service`, and
/// arrives `path` later. Undelivered packets count end - created.
Oracle brute_force(std::int64_t start, std::int64_t interval, std::int64_t service,
                   std::int64_t path, const std::vector<std::pair<std::int64_t, std::int64_t>>& win,
                   std::int64_t end) {
  Oracle o;
  std::int64_t free = start;
  bool blocked = false;  // once a packet cannot start, later ones cannot either
  for (std::int64_t k = 0;; ++k) {
    const std::int64_t c = start + k * interval;
    if (c >= end) break;
    ++o.tx;
    ++o.samples;
    std::int64_t t = std::max(c, free);
    std::int64_t begin = -1;
    if (!blocked) {
      for (const auto& [from, until] : win) {
        const std::int64_t s = std::max(t, from);
        if (s < std::min(until, end)) {
          begin = s;
          break;
        }
      }
    }
    if (begin < 0) {
      blocked = true;
      o.latency_ns += end - c;
      continue;
    }
    free = begin + service;
    const std::int64_t arrive = free + path;
    if (arrive <= end) {
      ++o.rx;
      o.latency_ns += arrive - c;
    } else {
      o.latency_ns += end - c;
    }
  }
  return o;
}

}  // namespace

TEST_CASE("single packet: latency is encryption plus path delay") {
  CbrStream s(SimTime::zero(), milliseconds(10), microseconds(18), milliseconds(6));
  const SimTime end = milliseconds(7);
  s.serve(SimTime::zero(), SimTime::max(), end);
  s.finish(end);
  CHECK(s.tx() == 1);
  CHECK(s.rx() == 1);
  CHECK(s.samples() == 1);
  CHECK(static_cast<double>(s.latency_sum_ns()) == 6018000.0);
}

TEST_CASE("packet rate and key ratio arithmetic") {
  // 10,000 kbit/s of 800-byte packets.
  const double pps = 10000e3 / (800 * 8);
  CHECK(pps == doctest::Approx(1562.5));
  CHECK(pps * 0.24 == doctest::Approx(375));
  CHECK(std::ceil(pps * 115 / 375) == 480);
}

TEST_CASE("no key ever active: TX grows, RX stays zero") {
  CbrStream s(SimTime::zero(), microseconds(640), microseconds(18), milliseconds(2));
  s.finish(seconds(10));
  CHECK(s.tx() == 15625);
  CHECK(s.rx() == 0);
  CHECK(s.samples() == s.tx());
}

TEST_CASE("closed form matches the packet-by-packet oracle") {
  RngStream rng(2024, "cbr-test");
  for (int trial = 0; trial < 400; ++trial) {
    const std::int64_t interval = 1000 + static_cast<std::int64_t>(rng.index(100000));
    const std::int64_t service = static_cast<std::int64_t>(rng.index(static_cast<std::uint64_t>(interval)));
    const std::int64_t path = static_cast<std::int64_t>(rng.index(5000000));
    const std::int64_t start = static_cast<std::int64_t>(rng.index(10000000));
    const std::int64_t end = start + 1 + static_cast<std::int64_t>(rng.index(200000000));
    std::vector<std::pair<std::int64_t, std::int64_t>> win;
    std::int64_t t = start + static_cast<std::int64_t>(rng.index(20000000));
    while (t < end + 10000000 && win.size() < 30) {
      const std::int64_t len = 1 + static_cast<std::int64_t>(rng.index(30000000));
      win.emplace_back(t, t + len);
      t += len + static_cast<std::int64_t>(rng.index(2)) * static_cast<std::int64_t>(rng.index(20000000));
    }

    CbrStream s(SimTime{start}, SimTime{interval}, SimTime{service}, SimTime{path});
    for (const auto& [from, until] : win) s.serve(SimTime{from}, SimTime{until}, SimTime{end});
    s.finish(SimTime{end});
    const Oracle o = brute_force(start, interval, service, path, win, end);

    INFO("trial " << trial);
    CHECK(s.tx() == o.tx);
    CHECK(s.rx() == o.rx);
    CHECK(s.samples() == o.samples);
    const long double diff = std::fabs(static_cast<double>(s.latency_sum_ns() - o.latency_ns));
    CHECK(diff <= 1e-9L * std::max<long double>(1, std::fabs(static_cast<double>(o.latency_ns))));
  }
}

TEST_CASE("plentiful keys: every latency is encryption plus path delay") {
  CbrStream s(SimTime::zero(), microseconds(640), microseconds(18), milliseconds(6));
  const SimTime end = seconds(5);
  s.serve(SimTime::zero(), SimTime::max(), end);
  s.finish(end);
  // Every delivered packet took 6.018 ms; the tail is censored.
  const Oracle o = brute_force(0, 640000, 18000, 6000000, {{0, end.ns()}}, end.ns());
  CHECK(s.rx() == o.rx);
  CHECK(s.tx() == o.tx);
  CHECK(static_cast<double>(s.latency_sum_ns()) == doctest::Approx(static_cast<double>(o.latency_ns)));
  // Only packets created in the last 6.018 ms are still in flight.
  CHECK(s.tx() - s.rx() == 9);
}

TEST_CASE("CBR parameter checks") {
  CHECK_THROWS_AS(CbrStream(SimTime::zero(), SimTime::zero(), SimTime::zero(), SimTime::zero()),
                  ParameterError);
  CHECK_THROWS_AS(CbrStream(SimTime::zero(), microseconds(10), microseconds(10), SimTime::zero()),
                  ParameterError);
}
