#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "qkdn/channel.hpp"
#include "qkdn/fabric.hpp"
#include "qkdn/kernel.hpp"
#include "qkdn/metrics.hpp"
#include "qkdn/params.hpp"
#include "qkdn/quantum.hpp"
#include "qkdn/topology.hpp"

namespace qkdn {

struct LinkReport {
  NodeId a = 0;
  NodeId b = 0;
  double key_rate = 0.0;
  std::uint64_t generated = 0;
  std::uint64_t consumed = 0;
  std::uint64_t consumed_transport = 0;
  std::uint64_t consumed_ack = 0;
  std::uint64_t consumed_cm = 0;
  std::uint64_t available = 0;
  std::uint64_t discarded = 0;
  std::uint64_t relayed_bundles = 0;
  std::uint64_t relayed_keys = 0;
  std::uint64_t backoffs = 0;
  bool conserved = false;
  std::vector<GenerationSample> generation_trace;
};

struct SessionReport {
  NodeId master = 0;
  NodeId slave = 0;
  bool bidirectional = false;
  std::uint64_t tx = 0;
  std::uint64_t rx = 0;
  std::uint64_t tx_back = 0;
  std::uint64_t rx_back = 0;
  std::uint64_t consumed = 0;
  std::uint64_t requests = 0;
  std::uint64_t failures = 0;
  std::optional<SimTime> traffic_start;
};

/// One node at one sampling instant; store figures sum the incident links.
struct KmsSample {
  SimTime at;
  NodeId node = 0;
  std::uint64_t pending_km = 0;
  std::uint64_t pending_cm = 0;
  std::uint64_t stored = 0;
  std::uint64_t consumed = 0;
  std::uint64_t relayed_bundles = 0;
};

struct CmSummary {
  std::uint64_t messages = 0;
  std::uint64_t delivered = 0;
  std::uint64_t lost = 0;
  /// QKD keys the KMS stores handed out for CM traffic.
  std::uint64_t keys_consumed = 0;
  /// Sum of per-message charges in the controller log.
  std::uint64_t keys_logged = 0;
  /// Delivered CM messages whose charge differs from the static KM hop count
  /// between agent and gateway (only meaningful at a 1:1 ratio).
  std::uint64_t hop_mismatches = 0;
  std::uint64_t delivered_path_hops = 0;
  std::uint64_t table_pushes = 0;
  std::uint64_t vector_requests = 0;
  std::uint64_t vector_replies = 0;
  std::uint64_t link_status = 0;
  std::uint64_t setup = 0;
  std::map<NodeId, std::uint64_t> pushes_received;
  std::map<NodeId, std::uint64_t> link_status_sent;
};

struct TransportSummary {
  std::uint64_t requested = 0;
  std::uint64_t delivered = 0;
  std::uint64_t acked = 0;
  std::uint64_t failed = 0;
};

struct RunResult {
  std::optional<SimTime> setup_complete;
  SimTime end;
  RunMetrics metrics;
  std::vector<LinkReport> links;
  std::vector<SessionReport> sessions;
  CmSummary cm;
  std::vector<CmRecord> cm_log;
  std::vector<KmsSample> kms_trace;  ///< only with NetworkParams::record_traces
  TransportSummary transports;
  std::map<ChannelLayer, LinkCounters> channels;
  std::uint64_t dead_letters = 0;
  std::uint64_t duplicate_key_uses = 0;
  std::uint64_t keys_recorded = 0;
  RunReport kernel;

  bool conserved() const;
  const LinkReport* link(NodeId a, NodeId b) const;
};

/// Builds the four layers on `topo` (which must already carry the
/// controller for `params.architecture`) and runs one simulation.
/// Throws ParameterError for an inconsistent topology or parameters.
RunResult run_network(const TopologySpec& topo, const NetworkParams& params,
                      std::ostream* trace = nullptr);

/// Sessions for a traffic configuration over the access nodes of `topo`.
std::vector<SessionSpec> plan_sessions(const TopologySpec& topo, const TrafficConfig& traffic,
                                       std::uint64_t seed);

}  // namespace qkdn
