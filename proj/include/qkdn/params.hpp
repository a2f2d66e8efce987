#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "qkdn/channel.hpp"
#include "qkdn/sim_time.hpp"
#include "qkdn/types.hpp"

namespace qkdn {

struct QkdDefaults {
  double jitter = 0.05;
  SimTime post_processing = seconds(1);
  std::uint32_t key_size = 256;
  SimTime tick = seconds(1);
  /// Draw each link's first-tick offset uniformly from [0, tick).
  bool random_phase = true;

  bool operator==(const QkdDefaults&) const = default;
};

struct KmsConfig {
  std::uint64_t storage_size = 100000;
  SimTime encryption_latency = microseconds(18);
  SimTime link_status_period = seconds(60);  ///< SimTime::max() disables updates
  std::uint32_t setup_threshold = 1;
  bool ack_consumes_key = false;
  /// CM packets encrypted per QKD key on each hop (CM-via-KMS only).
  std::uint32_t cm_packet_to_key_ratio = 1;

  bool operator==(const KmsConfig&) const = default;
};

struct NeConfig {
  double arrival_rate_kbps = 10000.0;
  std::uint32_t packet_size = 800;  ///< bytes
  SimTime encryption_latency = microseconds(18);
  SimTime key_lifetime = milliseconds(240);  ///< SimTime::max() never rekeys
  std::uint32_t cache_capacity = 3;
  std::uint32_t refill_threshold = 0;
  std::uint32_t keys_per_request = 3;
  SimTime retry_mean = seconds(3);

  /// Packet spacing, rounded to the nanosecond.
  SimTime packet_interval() const;

  bool operator==(const NeConfig&) const = default;
};

struct SessionSpec {
  NodeId master = 0;
  NodeId slave = 0;
  bool bidirectional = false;

  bool operator==(const SessionSpec&) const = default;
};

enum class TrafficPattern { all_pairs, single_peer, explicit_sessions };

std::string_view to_string(TrafficPattern p);
std::optional<TrafficPattern> parse_traffic_pattern(std::string_view s);

struct TrafficConfig {
  TrafficPattern pattern = TrafficPattern::all_pairs;
  std::vector<SessionSpec> sessions;  ///< explicit_sessions only
  /// Delay each session start by a seeded offset in [0, lifetime * keys_per_request).
  bool phase_offsets = true;

  bool operator==(const TrafficConfig&) const = default;
};

struct NetworkParams {
  CmArchitecture architecture = CmArchitecture::separately_protected;
  RoutingKind routing = RoutingKind::distributed_proactive;
  std::uint64_t seed = 42;
  SimTime total_time = seconds(400);
  /// When set, the run ends this long after setup completes (capped by
  /// total_time).
  std::optional<SimTime> effective_time;
  SimTime routing_update_period = seconds(60);
  SimTime queue_sample_interval = seconds(1);
  QkdDefaults qkd;
  KmsConfig kms;
  ChannelConfig channel;
  NeConfig ne;
  TrafficConfig traffic;
  /// Setup also waits until every session holds its first key, so traffic
  /// runs for the whole effective time.
  bool setup_includes_sessions = false;
  bool record_traces = false;  ///< per-tick generation and per-node KMS series

  /// Throws ParameterError on inconsistent values.
  void validate() const;

  bool operator==(const NetworkParams&) const = default;
};

struct Scenario {
  char label = 'A';
  CmArchitecture architecture = CmArchitecture::separately_protected;
  RoutingKind routing = RoutingKind::distributed_proactive;

  bool operator==(const Scenario&) const = default;
};

/// A = (SP, proactive), B = (SP, reactive), C = (CM-via-KMS, proactive),
/// D = (CM-via-KMS, reactive). Throws ParameterError for other labels.
Scenario scenario(char label);

}  // namespace qkdn
