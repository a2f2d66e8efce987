#include "qkdn/runner.hpp"

#include <atomic>
#include <chrono>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "qkdn/io.hpp"

namespace qkdn {

std::string RunKey::tag() const {
  std::string s(1, scenario.label);
  if (key_rate) s += "_" + format_double(*key_rate) + "kps";
  return s + fmt::format("_s{}", seed);
}

bool Experiment::ok() const {
  for (const auto& r : runs) {
    if (!r.ok()) return false;
  }
  return true;
}

const RunOutcome* Experiment::find(char scenario, std::optional<double> key_rate,
                                   std::uint64_t seed) const {
  for (const auto& r : runs) {
    if (r.key.scenario.label == scenario && r.key.key_rate == key_rate && r.key.seed == seed) {
      return &r;
    }
  }
  return nullptr;
}

std::vector<RunKey> plan_runs(const ScenarioConfig& c) {
  std::vector<RunKey> out;
  const auto scenarios = c.resolved_scenarios();
  std::vector<std::optional<double>> rates;
  for (double r : c.key_rates) rates.emplace_back(r);
  if (rates.empty()) rates.emplace_back(std::nullopt);
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    for (const auto& rate : rates) {
      for (std::uint64_t seed : c.seeds) out.push_back({i, scenarios[i], rate, seed});
    }
  }
  return out;
}

namespace {

void trim(RunResult& r) {
  r.cm_log.clear();
  r.cm_log.shrink_to_fit();
  r.kms_trace.clear();
  r.kms_trace.shrink_to_fit();
  for (auto& l : r.links) {
    l.generation_trace.clear();
    l.generation_trace.shrink_to_fit();
  }
}

std::vector<ScenarioSweep> build_sweeps(const ScenarioConfig& c,
                                        const std::vector<RunOutcome>& runs) {
  std::vector<ScenarioSweep> out;
  if (c.key_rates.empty()) return out;
  const auto scenarios = c.resolved_scenarios();
  for (std::size_t si = 0; si < scenarios.size(); ++si) {
    ScenarioSweep sw;
    sw.scenario = scenarios[si];
    for (std::uint64_t seed : c.seeds) sw.per_seed.push_back({seed, {}});
    for (double rate : c.key_rates) {
      std::vector<RunMetrics> samples;
      for (std::size_t k = 0; k < c.seeds.size(); ++k) {
        for (const auto& r : runs) {
          if (r.key.scenario_index != si || r.key.key_rate != rate || r.key.seed != c.seeds[k]) {
            continue;
          }
          if (!r.ok()) continue;
          samples.push_back(r.result->metrics);
          sw.per_seed[k].second.points.push_back({rate, r.result->metrics});
        }
      }
      if (!samples.empty()) sw.mean.points.push_back({rate, average_runs(samples)});
    }
    for (Metric m : kAllMetrics) {
      std::size_t valued = 0;
      for (const auto& p : sw.mean.points) valued += p.metrics.get(m).has_value();
      if (valued >= 3) {
        sw.cutoffs[m] = detect_cutoff(sw.mean, m, c.cutoff_factor);
      } else {
        sw.cutoffs[m] = std::nullopt;
      }
    }
    out.push_back(std::move(sw));
  }
  return out;
}

}  // namespace

Experiment run_experiment(const ScenarioConfig& c, const RunOptions& opt) {
  c.validate();
  Experiment ex;
  ex.config = c;
  const auto plan = plan_runs(c);

  // One topology per (scenario, key rate); built up front so a bad topology
  // fails the whole invocation before anything runs.
  std::map<std::pair<std::size_t, std::optional<double>>, TopologySpec> topologies;
  for (const auto& k : plan) {
    const auto id = std::make_pair(k.scenario_index, k.key_rate);
    if (!topologies.count(id)) topologies.emplace(id, build_topology(c, k.scenario, k.key_rate));
  }

  ex.runs.resize(plan.size());
  unsigned workers = opt.workers ? opt.workers : c.workers;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(plan.size(), 1)));

  std::atomic<std::size_t> next{0};
  std::mutex mu;
  auto work = [&] {
    for (std::size_t i = next++; i < plan.size(); i = next++) {
      RunOutcome out;
      out.key = plan[i];
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const auto& topo = topologies.at({out.key.scenario_index, out.key.key_rate});
        out.result = run_network(topo, make_params(c, out.key.scenario, out.key.seed));
      } catch (const std::exception& e) {
        out.error = e.what();
      }
      out.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      {
        std::lock_guard lock(mu);
        if (out.result && opt.inspect) opt.inspect(out.key, *out.result);
        if (out.result && !opt.keep_detail) trim(*out.result);
        if (opt.on_done) opt.on_done(out);
      }
      ex.runs[i] = std::move(out);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  ex.sweeps = build_sweeps(c, ex.runs);
  return ex;
}

}  // namespace qkdn
