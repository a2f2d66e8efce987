#include <doctest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "qkdn/errors.hpp"
#include "qkdn/io.hpp"
#include "qkdn/report.hpp"
#include "qkdn/runner.hpp"

using namespace qkdn;

namespace {

ScenarioConfig small(std::vector<char> scenarios, std::vector<double> rates) {
  ScenarioConfig c = default_config();
  c.scenarios = std::move(scenarios);
  c.key_rates = std::move(rates);
  c.params.total_time = seconds(60);
  c.workers = 2;
  return c;
}

std::size_t count_lines(const std::string& s, bool skip_comments = true) {
  std::istringstream in(s);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (line.empty() || (skip_comments && line[0] == '#')) continue;
    ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("one run per scenario x rate x seed, in plan order") {
  ScenarioConfig c = small({'D'}, {50, 100, 200, 340, 400});
  c.seeds = {42};
  const auto plan = plan_runs(c);
  CHECK(plan.size() == 5);
  CHECK(plan[0].tag() == "D_50kps_s42");
  c.scenarios = {'A', 'B'};
  c.seeds = {1, 2};
  CHECK(plan_runs(c).size() == 20);
  ScenarioConfig padua = padua_config();
  CHECK(plan_runs(padua).size() == 1);
  CHECK(!plan_runs(padua)[0].key_rate);
}

TEST_CASE("sweep artifacts: rows, columns and figure files") {
  const auto c = small({'A', 'B', 'C', 'D'}, {10, 25, 50, 100, 340, 500});
  const Experiment ex = run_experiment(c);
  CHECK(ex.ok());
  REQUIRE(ex.sweeps.size() == 4);
  for (const auto& sw : ex.sweeps) {
    CHECK(sw.mean.points.size() == 6);
    const std::string csv = sweep_csv(sw);
    CHECK(count_lines(csv) == 7);  // header + 6 rates
    CHECK(csv.find("t_msg_ne_node_max") != std::string::npos);
    CHECK(sw.cutoffs.size() == 4);
  }
  CHECK(count_lines(figure_csv(ex)) == 1 + 4 * 4 * 6);
  for (Metric m : kAllMetrics) {
    const auto dat = figure_dat(ex, m);
    CHECK(count_lines(dat) == 4 * 6);
  }
  CHECK(count_lines(runs_csv(ex)) == 1 + 24);
}

TEST_CASE("single scenario figure data stays valid") {
  const Experiment ex = run_experiment(small({'B'}, {50, 340, 500}));
  REQUIRE(ex.sweeps.size() == 1);
  CHECK(count_lines(figure_dat(ex, Metric::t_key)) == 3);
  CHECK(figure_dat(ex, Metric::t_key).find("\n\n\n") == std::string::npos);
}

TEST_CASE("KM-layer cut-offs never precede the NE cut-off") {
  ScenarioConfig c = small({'A', 'D'}, {10, 25, 50, 100, 200, 340, 500});
  c.params.total_time = seconds(150);
  const Experiment ex = run_experiment(c);
  for (const auto& sw : ex.sweeps) {
    const auto& ne = *sw.cutoffs.at(Metric::t_msg_ne);
    for (Metric m : {Metric::t_key, Metric::t_msg_km}) {
      const auto& km = *sw.cutoffs.at(m);
      if (ne.kps) {
        REQUIRE(km.kps);
        CHECK(*km.kps >= *ne.kps);
      }
    }
  }
}

TEST_CASE("worker count does not change results") {
  auto c = small({'C', 'D'}, {50, 200, 500});
  c.seeds = {42, 43};
  c.workers = 1;
  const auto serial = run_experiment(c);
  c.workers = 3;
  const auto parallel = run_experiment(c);
  CHECK(runs_csv(serial) == runs_csv(parallel));
  CHECK(summary_json(serial) == summary_json(parallel));
  for (const auto& sw : serial.sweeps) {
    for (const auto& other : parallel.sweeps) {
      if (other.scenario.label == sw.scenario.label) CHECK(sweep_csv(sw) == sweep_csv(other));
    }
  }
}

TEST_CASE("artifacts are written atomically and reproducibly") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "qkdn-runner-test";
  fs::remove_all(dir);
  auto c = small({'A', 'D'}, {50, 500});
  const auto ex = run_experiment(c);
  write_experiment(ex, (dir / "one").string());
  write_figure(ex, (dir / "one").string());
  write_experiment(run_experiment(c), (dir / "two").string());
  write_figure(run_experiment(c), (dir / "two").string());
  std::set<std::string> names;
  for (const auto& e : fs::recursive_directory_iterator(dir / "one")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir / "one").string();
    names.insert(rel);
    CHECK(rel.find(".tmp") == std::string::npos);
    CHECK(read_file(e.path().string()) == read_file((dir / "two" / rel).string()));
  }
  for (const char* f : {"config.yaml", "runs.csv", "summary.json", "summary.txt", "sweep_A.csv",
                        "sweep_D.csv", "figure.csv", "figure_t_key.dat"}) {
    CHECK(names.count(f) == 1);
  }
  // The dumped config reloads to the same experiment.
  const auto reloaded = load_config((dir / "one" / "config.yaml").string());
  CHECK(reloaded == c);
  fs::remove_all(dir);
}

TEST_CASE("a bad topology fails before any run") {
  ScenarioConfig c = small({'A'}, {50});
  c.topology.kind = TopologyKind::file;
  c.topology.file = "/nonexistent/topology.yaml";
  int runs = 0;
  RunOptions opt;
  opt.on_done = [&](const RunOutcome&) { ++runs; };
  CHECK_THROWS_AS(run_experiment(c, opt), ConfigError);
  CHECK(runs == 0);
}

TEST_CASE("Padua checks and report") {
  const auto ex = run_experiment(padua_config());
  REQUIRE(ex.ok());
  const auto& r = *ex.runs.at(0).result;
  const auto checks = padua_checks(r);
  CHECK(checks.size() == 10);
  const auto text = padua_report(r, 42);
  CHECK(text.find("relayed keys 3-6") != std::string::npos);
  CHECK(text.find("setup time") != std::string::npos);
}
