#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qkdn/config.hpp"
#include "qkdn/metrics.hpp"
#include "qkdn/network.hpp"

namespace qkdn {

struct RunKey {
  std::size_t scenario_index = 0;
  Scenario scenario;
  std::optional<double> key_rate;
  std::uint64_t seed = 0;

  /// File-name friendly identifier, e.g. "D_340kps_s42".
  std::string tag() const;
};

struct RunOutcome {
  RunKey key;
  std::optional<RunResult> result;
  std::string error;  ///< set when the run faulted
  double wall_seconds = 0.0;

  bool ok() const { return result.has_value(); }
};

struct ScenarioSweep {
  Scenario scenario;
  SweepResult mean;  ///< averaged over seeds
  std::vector<std::pair<std::uint64_t, SweepResult>> per_seed;
  /// Absent for a metric when the sweep has fewer than three valued points.
  std::map<Metric, std::optional<Cutoff>> cutoffs;
};

struct Experiment {
  ScenarioConfig config;
  std::vector<RunOutcome> runs;     ///< in plan order
  std::vector<ScenarioSweep> sweeps;  ///< only when key rates are swept

  bool ok() const;
  const RunOutcome* find(char scenario, std::optional<double> key_rate, std::uint64_t seed) const;
};

struct RunOptions {
  unsigned workers = 0;  ///< 0 falls back to the config, then the hardware
  /// Keeps the CM log, generation and KMS traces in the results.
  bool keep_detail = false;
  /// Called once per run as it finishes, serialized but in completion order.
  std::function<void(const RunOutcome&)> on_done;
  /// Sees every full result before trimming, serialized.
  std::function<void(const RunKey&, const RunResult&)> inspect;
};

/// Runs in (scenario, key rate, seed) order.
std::vector<RunKey> plan_runs(const ScenarioConfig& c);

/// Executes every planned run on a worker pool and merges in plan order.
/// Topologies are built before any run starts, so configuration problems
/// surface as ConfigError/ParameterError without partial results. Faults in
/// individual runs are captured in their outcome.
Experiment run_experiment(const ScenarioConfig& c, const RunOptions& opt = {});

}  // namespace qkdn
