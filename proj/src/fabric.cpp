#include "qkdn/fabric.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "qkdn/app.hpp"
#include "qkdn/control.hpp"
#include "qkdn/errors.hpp"
#include "qkdn/kms.hpp"

namespace qkdn {

namespace {

std::uint64_t pair_key(NodeId a, NodeId b) {
  return (std::uint64_t{static_cast<std::uint32_t>(std::min(a, b))} << 32) |
         static_cast<std::uint32_t>(std::max(a, b));
}

}  // namespace

Fabric::Fabric(Simulator& s, const TopologySpec& t, const NetworkParams& p)
    : sim(s), topo(t), params(p), routes(compute_routes(t)), end(p.total_time) {
  controller_id = t.controller().value_or(-1);
  gateway_id = t.gateway().value_or(-1);

  std::vector<NodeId> app_nodes;
  for (NodeId n : t.km_nodes()) {
    if (n != gateway_id) app_nodes.push_back(n);
  }
  std::vector<LinkSpec> app_links;
  for (const auto& l : t.links) {
    if (l.a != gateway_id && l.b != gateway_id) app_links.push_back(l);
  }
  app_routes = RouteTable(app_nodes, app_links);

  stores.reserve(t.links.size());
  for (std::size_t i = 0; i < t.links.size(); ++i) {
    stores.emplace_back(p.kms.storage_size);
    link_index_.emplace(pair_key(t.links[i].a, t.links[i].b), static_cast<LinkIndex>(i));
  }
  ledger = KeyUsageLedger(t.links.size());
  link_use.resize(t.links.size());
}

Fabric::~Fabric() = default;

Kms& Fabric::kms_at(NodeId n) const {
  if (n < 0 || static_cast<std::size_t>(n) >= kms.size() || !kms[static_cast<std::size_t>(n)]) {
    throw SimulationFault(fmt::format("node {} has no KMS", n));
  }
  return *kms[static_cast<std::size_t>(n)];
}

NetworkEncryptor* Fabric::ne_at(NodeId n) const {
  if (n < 0 || static_cast<std::size_t>(n) >= ne.size()) return nullptr;
  return ne[static_cast<std::size_t>(n)].get();
}

std::optional<LinkIndex> Fabric::link_between(NodeId a, NodeId b) const {
  const auto it = link_index_.find(pair_key(a, b));
  if (it == link_index_.end()) return std::nullopt;
  return it->second;
}

MsgId Fabric::new_cm(MsgKind kind, NodeId origin, NodeId destination) {
  CmRecord r;
  r.kind = kind;
  r.origin = origin;
  r.destination = destination;
  r.created = sim.now();
  if (via_kms()) {
    const NodeId agent = origin == controller_id ? destination : origin;
    r.path_hops = static_cast<std::uint16_t>(routes.hops(agent, gateway_id));
  }
  Message m;
  m.kind = kind;
  m.origin = origin;
  m.destination = destination;
  m.created = r.created;
  m.ref = static_cast<std::uint32_t>(cm_log.size());
  cm_log.push_back(r);
  return pool.alloc(m);
}

void Fabric::cm_delivered(const Message& m) { cm_log[m.ref].delivered = sim.now(); }

void Fabric::node_routed(NodeId n) {
  ++routed_nodes;
  if (auto* e = ne_at(n)) e->on_routes();
  maybe_complete_setup();
}

void Fabric::session_connected() {
  ++connected_sessions;
  maybe_complete_setup();
}

void Fabric::maybe_complete_setup() {
  if (setup_complete || routed_nodes != topo.km_nodes().size()) return;
  if (params.setup_includes_sessions && connected_sessions != sessions.size()) return;
  setup_complete = sim.now();
  if (on_setup_complete) on_setup_complete();
}

}  // namespace qkdn
