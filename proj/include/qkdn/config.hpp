#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qkdn/params.hpp"
#include "qkdn/topology.hpp"

namespace qkdn {

enum class TopologyKind { internet_like, padua, file };

struct TopologySource {
  TopologyKind kind = TopologyKind::internet_like;
  int nodes = 20;
  std::uint64_t seed = 42;
  std::string file;
  NodeId gateway_at = 19;

  bool operator==(const TopologySource&) const = default;
};

/// Everything one invocation runs: a set of scenarios, each swept over key
/// rates and repeated over seeds, on one topology.
struct ScenarioConfig {
  /// Scenario labels A-D. When empty, `params.architecture` and
  /// `params.routing` define a single unlabeled scenario.
  std::vector<char> scenarios = {'A', 'B', 'C', 'D'};
  TopologySource topology;
  /// Key rate applied to every QKD link, one run per value. Empty keeps the
  /// rates of the topology.
  std::vector<double> key_rates = {10, 25, 50, 100, 200, 340, 500};
  std::vector<std::uint64_t> seeds = {42};
  SimTime link_delay = milliseconds(2);
  double loss_probability = 0.0;
  NetworkParams params;
  double cutoff_factor = 2.0;
  std::string output_dir = "qkdn-out";
  unsigned workers = 0;  ///< 0 picks the hardware concurrency

  /// Scenarios to run, resolving an empty label list to the explicit pair.
  std::vector<Scenario> resolved_scenarios() const;
  void validate() const;

  bool operator==(const ScenarioConfig&) const = default;
};

/// The 20-node experiment with all parameter defaults.
ScenarioConfig default_config();
/// Padua path, one bidirectional session 1<->6, 115 s after setup.
ScenarioConfig padua_config();

/// Parses YAML on top of default_config(). `base_dir` resolves a relative
/// topology file. Throws ConfigError carrying the offending line.
ScenarioConfig parse_config(const std::string& text, const std::string& base_dir = ".");
ScenarioConfig load_config(const std::string& path);
/// Complete effective configuration; parse_config(dump_config(c)) == c.
std::string dump_config(const ScenarioConfig& c);

/// Topology for one run: the source graph with every link at `key_rate`
/// (when given) and the controller attached for the scenario.
TopologySpec build_topology(const ScenarioConfig& c, const Scenario& s,
                            std::optional<double> key_rate);
NetworkParams make_params(const ScenarioConfig& c, const Scenario& s, std::uint64_t seed);

}  // namespace qkdn
