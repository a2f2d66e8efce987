#pragma once

#include <cstdint>
#include <memory>
#include <functional>
#include <optional>
#include <unordered_map>
#include <vector>

#include "qkdn/cbr.hpp"
#include "qkdn/channel.hpp"
#include "qkdn/kernel.hpp"
#include "qkdn/key_store.hpp"
#include "qkdn/message.hpp"
#include "qkdn/params.hpp"
#include "qkdn/routing.hpp"
#include "qkdn/topology.hpp"

namespace qkdn {

class Kms;
class Controller;
class NetworkEncryptor;

/// One forwarding key-distribution request: an RNG bundle relayed from
/// src to dst and acknowledged back.
struct Transport {
  NodeId src = 0;
  NodeId dst = 0;
  std::uint32_t bundle = 0;
  std::uint32_t session = 0;
  SimTime requested;
  SimTime delivered{-1};
  SimTime acked{-1};
  bool failed = false;
};

/// Controller-side log entry for one CM message.
struct CmRecord {
  MsgKind kind = MsgKind::setup;
  NodeId origin = 0;
  NodeId destination = 0;
  SimTime created;
  SimTime delivered{-1};
  /// KM hops on the static path between the agent and the gateway.
  std::uint16_t path_hops = 0;
  /// Keys charged, updated at every charged hop.
  std::uint16_t keys_charged = 0;
  bool lost = false;
};

struct LinkUse {
  std::uint64_t relayed_bundles = 0;
  std::uint64_t relayed_keys = 0;
};

struct Session {
  std::uint32_t id = 0;
  NodeId master = 0;
  NodeId slave = 0;
  bool bidirectional = false;
  SimTime path_delay;
  SimTime start_offset;
  std::optional<CbrStream> forward;
  std::optional<CbrStream> backward;
  std::uint32_t cache = 0;
  bool outstanding = false;
  bool key_active = false;
  bool negotiated = false;
  SimTime active_from;
  SimTime active_until;
  std::uint64_t consumed = 0;
  std::uint64_t requests = 0;
  std::uint64_t failures = 0;
};

/// Shared state of one simulation run. Modules reach each other through
/// it; nothing in here outlives the run.
struct Fabric {
  Fabric(Simulator& sim, const TopologySpec& topo, const NetworkParams& params);
  ~Fabric();

  Simulator& sim;
  const TopologySpec& topo;
  const NetworkParams& params;

  MessagePool pool;
  RouteTable routes;      ///< KM graph
  RouteTable app_routes;  ///< application graph (KM graph without the gateway)
  std::vector<KeyStore> stores;
  KeyUsageLedger ledger;
  std::vector<LinkUse> link_use;

  std::unique_ptr<ClassicalChannel> km;
  std::unique_ptr<ClassicalChannel> app;
  std::unique_ptr<ClassicalChannel> mgmt;
  std::unique_ptr<ClassicalChannel> ctrl;

  std::vector<std::unique_ptr<Kms>> kms;  ///< indexed by node id
  std::unique_ptr<Controller> controller;
  std::vector<std::unique_ptr<NetworkEncryptor>> ne;  ///< indexed by node id

  std::vector<Transport> transports;
  std::vector<Session> sessions;
  std::vector<CmRecord> cm_log;

  NodeId controller_id = -1;
  NodeId gateway_id = -1;
  std::optional<SimTime> setup_complete;
  SimTime end;
  std::size_t routed_nodes = 0;
  std::size_t connected_sessions = 0;
  /// Called once when every KM node holds routing state and, with
  /// NetworkParams::setup_includes_sessions, every session has its first key.
  std::function<void()> on_setup_complete;

  Kms& kms_at(NodeId n) const;
  NetworkEncryptor* ne_at(NodeId n) const;
  std::optional<LinkIndex> link_between(NodeId a, NodeId b) const;
  bool via_kms() const { return params.architecture == CmArchitecture::cm_via_kms; }
  bool reactive() const { return params.routing == RoutingKind::source_reactive; }

  /// Allocates a CM message and its log entry.
  MsgId new_cm(MsgKind kind, NodeId origin, NodeId destination);
  void cm_delivered(const Message& m);
  void node_routed(NodeId n);
  void session_connected();

 private:
  void maybe_complete_setup();

  std::unordered_map<std::uint64_t, LinkIndex> link_index_;
};

}  // namespace qkdn
