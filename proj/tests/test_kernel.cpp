#include <doctest.h>

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "qkdn/errors.hpp"
#include "qkdn/kernel.hpp"
#include "qkdn/rng.hpp"

using namespace qkdn;

namespace {

struct Recorder : EventHandler {
  Simulator* sim = nullptr;
  std::vector<std::tuple<std::int64_t, std::uint64_t, std::uint32_t>> seen;  // now, seq, tag
  void handle(const Event& ev) override {
    CHECK(sim->now() == ev.fire_at);
    seen.emplace_back(sim->now().ns(), ev.seq, ev.tag);
  }
};

struct Thrower : EventHandler {
  void handle(const Event&) override { throw std::runtime_error("boom"); }
};

}  // namespace

TEST_CASE("equal timestamps run in issue order") {
  Simulator sim;
  Recorder r;
  r.sim = &sim;
  const auto h = sim.add_handler(r, "r");
  sim.schedule(milliseconds(5), h, 1);
  sim.schedule(milliseconds(5), h, 2);
  sim.schedule(milliseconds(1), h, 3);
  sim.schedule(milliseconds(5), h, 4);
  sim.run(seconds(1));
  REQUIRE(r.seen.size() == 4);
  CHECK(std::get<2>(r.seen[0]) == 3);
  CHECK(std::get<2>(r.seen[1]) == 1);
  CHECK(std::get<2>(r.seen[2]) == 2);
  CHECK(std::get<2>(r.seen[3]) == 4);
}

TEST_CASE("zero delay fires now, after earlier events at the same instant") {
  Simulator sim;
  Recorder r;
  r.sim = &sim;
  const auto h = sim.add_handler(r, "r");
  sim.schedule_fn(milliseconds(3), [&] { sim.schedule(SimTime::zero(), h, 9); });
  sim.schedule(milliseconds(3), h, 1);
  sim.run(seconds(1));
  REQUIRE(r.seen.size() == 2);
  CHECK(std::get<2>(r.seen[0]) == 1);
  CHECK(std::get<2>(r.seen[1]) == 9);
  CHECK(std::get<0>(r.seen[1]) == 3'000'000);
}

TEST_CASE("2 ms delay is exactly 2,000,000 ticks and 0.018 ms is 18,000") {
  CHECK(milliseconds(2).ns() == 2'000'000);
  CHECK(SimTime::from_ms(0.018).ns() == 18'000);
  CHECK(SimTime::from_s(0.24).ns() == 240'000'000);
  Simulator sim;
  Recorder r;
  r.sim = &sim;
  const auto h = sim.add_handler(r, "r");
  sim.schedule(milliseconds(2), h, 0);
  sim.run(seconds(1));
  CHECK(std::get<0>(r.seen.at(0)) == 2'000'000);
}

TEST_CASE("empty queue returns at clock zero") {
  Simulator sim;
  const auto rep = sim.run(seconds(400));
  CHECK(rep.processed == 0);
  CHECK(rep.final_clock == SimTime::zero());
}

TEST_CASE("run stops at the limit and stop_at lowers it") {
  Simulator sim;
  Recorder r;
  r.sim = &sim;
  const auto h = sim.add_handler(r, "r");
  for (int i = 1; i <= 10; ++i) sim.schedule(seconds(i), h, static_cast<std::uint32_t>(i));
  sim.schedule_fn(seconds(3), [&] { sim.stop_at(seconds(5)); });
  const auto rep = sim.run(seconds(8));
  CHECK(r.seen.size() == 5);
  CHECK(rep.final_clock <= seconds(5));
  CHECK(sim.stopped());
}

TEST_CASE("scheduling after shutdown is rejected") {
  Simulator sim;
  sim.run(seconds(1));
  Recorder r;
  r.sim = &sim;
  const auto h = sim.add_handler(r, "r");
  CHECK_THROWS_AS(sim.schedule(seconds(1), h, 0), EngineStopped);
}

TEST_CASE("handler exceptions surface as simulation faults") {
  Simulator sim;
  Thrower t;
  const auto h = sim.add_handler(t, "thrower");
  sim.schedule(seconds(1), h, 0);
  CHECK_THROWS_AS(sim.run(seconds(2)), SimulationFault);
}

TEST_CASE("cancelled events do not fire") {
  Simulator sim;
  Recorder r;
  r.sim = &sim;
  const auto h = sim.add_handler(r, "r");
  const auto e = sim.schedule(seconds(1), h, 1);
  sim.schedule(seconds(2), h, 2);
  CHECK(sim.cancel(e));
  const auto rep = sim.run(seconds(3));
  REQUIRE(r.seen.size() == 1);
  CHECK(std::get<2>(r.seen[0]) == 2);
  CHECK(rep.cancelled == 1);
}

TEST_CASE("property: processing order equals a stable sort by fire time") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Simulator sim;
    Recorder r;
    r.sim = &sim;
    const auto h = sim.add_handler(r, "r");
    RngStream rng(seed, "kernel-test");
    std::vector<std::pair<std::int64_t, std::uint32_t>> expect;
    for (std::uint32_t i = 0; i < 500; ++i) {
      // Few distinct instants force many ties.
      const auto t = static_cast<std::int64_t>(rng.index(20)) * 1000;
      sim.schedule(SimTime{t}, h, i);
      expect.emplace_back(t, i);
    }
    std::stable_sort(expect.begin(), expect.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    sim.run(seconds(1));
    REQUIRE(r.seen.size() == expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i) {
      CHECK(std::get<0>(r.seen[i]) == expect[i].first);
      CHECK(std::get<2>(r.seen[i]) == expect[i].second);
      if (i > 0) {
        const auto prev = std::make_pair(std::get<0>(r.seen[i - 1]), std::get<1>(r.seen[i - 1]));
        const auto cur = std::make_pair(std::get<0>(r.seen[i]), std::get<1>(r.seen[i]));
        CHECK(prev < cur);
      }
    }
  }
}

TEST_CASE("identical schedules give identical digests and traces") {
  auto once = [](std::uint64_t seed, std::string& text) {
    Simulator sim;
    Recorder r;
    r.sim = &sim;
    const auto h = sim.add_handler(r, "r");
    std::ostringstream os;
    sim.set_trace_stream(&os);
    RngStream rng(seed, "digest");
    for (int i = 0; i < 100; ++i) sim.schedule(rng.exponential(milliseconds(3)), h, 0, rng.index(7));
    const auto rep = sim.run(seconds(10));
    text = os.str();
    return rep.trace_digest;
  };
  std::string a, b, c;
  CHECK(once(5, a) == once(5, b));
  CHECK(a == b);
  CHECK(!a.empty());
  CHECK(once(6, c) != once(5, b));
}
