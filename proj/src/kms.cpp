#include "qkdn/kms.hpp"

#include <algorithm>
#include <fmt/format.h>

#include "qkdn/app.hpp"
#include "qkdn/errors.hpp"

namespace qkdn {

Kms::Kms(Fabric& f, NodeId node) : f_(f), node_(node) {
  self_ = f_.sim.add_handler(*this, fmt::format("kms/{}", node));
  for (NodeId peer : f_.topo.neighbors(node)) {
    const auto link = f_.link_between(node, peer);
    Slot s;
    s.link = *link;
    s.peer = peer;
    s.parity = assign_parity_roles(node, peer).encrypt_parity(node);
    slot_of_.emplace(peer, slots_.size());
    slots_.push_back(std::move(s));
  }
}

void Kms::custody(const Message& m, int delta) {
  std::size_t& c = is_cm(m.kind) ? pending_cm_ : pending_km_;
  c = delta > 0 ? c + 1 : c - 1;
}

std::uint32_t Kms::request_key_transport(NodeId dst, std::uint32_t n_keys,
                                         std::uint32_t session) {
  if (dst == node_) throw ParameterError("key transport needs distinct endpoints");
  const auto t = static_cast<std::uint32_t>(f_.transports.size());
  Transport tr;
  tr.src = node_;
  tr.dst = dst;
  tr.bundle = n_keys;
  tr.session = session;
  tr.requested = f_.sim.now();
  f_.transports.push_back(tr);
  if (f_.reactive()) {
    // The transport counts as queued while its routing vector is fetched.
    ++pending_km_;
    const MsgId req = f_.new_cm(MsgKind::route_request, node_, f_.controller_id);
    f_.pool[req].aux = t;
    f_.pool[req].subject = dst;
    send_cm(req);
  } else {
    start_transport(t, nullptr);
  }
  return t;
}

void Kms::start_transport(std::uint32_t t, const std::vector<NodeId>* route) {
  const Transport& tr = f_.transports[t];
  Message m;
  m.kind = MsgKind::key_transport;
  m.origin = node_;
  m.destination = tr.dst;
  m.ref = t;
  m.bundle = tr.bundle;
  m.created = f_.sim.now();
  m.route = route;
  m.pos = 0;
  this->route(f_.pool.alloc(m));
}

void Kms::abort_vector_wait(std::uint32_t t) {
  --pending_km_;
  f_.transports[t].failed = true;
  if (auto* ne = f_.ne_at(node_)) ne->on_transport_failed(f_.transports[t].session);
}

void Kms::send_cm(MsgId msg) {
  if (f_.via_kms()) {
    route(msg);
  } else {
    f_.mgmt->transmit(node_, f_.controller_id, msg);
  }
}

void Kms::relay_cm(MsgId msg) {
  if (!f_.via_kms()) throw ParameterError("CM relay is only available in CM-via-KMS");
  route(msg);
}

void Kms::on_cm_from_controller(MsgId msg) {
  if (f_.via_kms()) {
    relay_cm(msg);
  } else {
    deliver_local(msg);
  }
}

void Kms::on_km_message(MsgId id) {
  Message& m = f_.pool[id];
  ++m.km_hops;
  if (m.route && !is_cm(m.kind)) {
    m.pos = m.reverse ? m.pos - 1 : m.pos + 1;
    if ((*m.route)[m.pos] != node_) {
      throw SimulationFault(fmt::format("node {} received a message routed to {}", node_,
                                        (*m.route)[m.pos]));
    }
  }
  route(id);
}

void Kms::route(MsgId id) {
  Message& m = f_.pool[id];
  if (m.destination == node_) {
    deliver_local(id);
    return;
  }
  std::optional<NodeId> next;
  if (is_cm(m.kind)) {
    if (m.destination == f_.controller_id) {
      if (node_ == f_.gateway_id) {
        f_.ctrl->transmit(node_, f_.controller_id, id);
        return;
      }
      next = f_.routes.next_hop(node_, f_.gateway_id);
    } else {
      next = f_.routes.next_hop(node_, m.destination);
    }
  } else if (m.route != nullptr) {
    next = (*m.route)[m.reverse ? m.pos - 1 : m.pos + 1];
  } else if (routed_) {
    next = f_.routes.next_hop(node_, m.destination);
  } else {
    parked_.push_back(id);
    custody(m, +1);
    return;
  }
  if (!next) throw SimulationFault(fmt::format("node {}: no route to {}", node_, m.destination));
  enqueue(id, *next);
}

void Kms::enqueue(MsgId id, NodeId next) {
  const auto it = slot_of_.find(next);
  if (it == slot_of_.end()) {
    throw SimulationFault(fmt::format("node {}: {} is not a KM neighbour", node_, next));
  }
  Message& m = f_.pool[id];
  m.next_hop = next;
  custody(m, +1);
  Slot& s = slots_[it->second];
  s.wait.push_back(id);
  drain(s);
}

bool Kms::needs_key(const Message& m, const Slot& s) const {
  switch (m.kind) {
    case MsgKind::key_transport: return true;
    case MsgKind::transport_ack: return f_.params.kms.ack_consumes_key;
    default: return s.cm_packets % f_.params.kms.cm_packet_to_key_ratio == 0;
  }
}

void Kms::drain(Slot& s) {
  while (!s.wait.empty()) {
    const MsgId id = s.wait.front();
    Message& m = f_.pool[id];
    if (needs_key(m, s)) {
      const KeyUse use = m.kind == MsgKind::key_transport   ? KeyUse::transport
                         : m.kind == MsgKind::transport_ack ? KeyUse::ack
                                                            : KeyUse::cm;
      const auto key = f_.stores[s.link].take(s.parity, use);
      if (!key) break;
      f_.ledger.record(s.link, *key);
      ++m.keys_charged;
      if (is_cm(m.kind)) ++f_.cm_log[m.ref].keys_charged;
    }
    if (is_cm(m.kind)) ++s.cm_packets;
    s.wait.pop_front();
    const SimTime start = std::max(f_.sim.now(), busy_until_);
    busy_until_ = start + f_.params.kms.encryption_latency;
    f_.sim.schedule_at(busy_until_, self_, kDepart, id);
  }
}

void Kms::depart(MsgId id) {
  Message& m = f_.pool[id];
  custody(m, -1);
  ++processed_;
  if (m.kind == MsgKind::key_transport) {
    LinkUse& u = f_.link_use[slots_[slot_of_.at(m.next_hop)].link];
    ++u.relayed_bundles;
    u.relayed_keys += m.bundle;
  }
  f_.km->transmit(node_, m.next_hop, id);
}

void Kms::deliver_local(MsgId id) {
  Message& m = f_.pool[id];
  const SimTime now = f_.sim.now();
  if (is_cm(m.kind)) f_.cm_delivered(m);
  switch (m.kind) {
    case MsgKind::key_transport: {
      Transport& t = f_.transports[m.ref];
      t.delivered = now;
      if (auto* ne = f_.ne_at(node_)) ne->on_bundle_arrived(t.session);
      // The same slot turns into the acknowledgement on the reverse path.
      m.kind = MsgKind::transport_ack;
      std::swap(m.origin, m.destination);
      m.created = now;
      m.reverse = true;
      m.km_hops = 0;
      m.keys_charged = 0;
      route(id);
      return;
    }
    case MsgKind::transport_ack: {
      Transport& t = f_.transports[m.ref];
      t.acked = now;
      f_.pool.release(id);
      if (auto* ne = f_.ne_at(node_)) ne->on_bundle_acked(t.session, t.bundle);
      return;
    }
    case MsgKind::route_reply: {
      const std::uint32_t t = m.aux;
      const auto* r = m.route;
      f_.pool.release(id);
      --pending_km_;
      start_transport(t, r);
      return;
    }
    case MsgKind::table_push:
    case MsgKind::route_init:
      f_.pool.release(id);
      install_routes();
      return;
    default:
      f_.pool.release(id);
      return;
  }
}

void Kms::install_routes() {
  // Every push carries the same static table; only the first one changes
  // anything.
  if (routed_) return;
  routed_ = true;
  while (!parked_.empty()) {
    const MsgId id = parked_.front();
    parked_.pop_front();
    custody(f_.pool[id], -1);
    route(id);
  }
  f_.node_routed(node_);
}

void Kms::on_keys(LinkIndex link) {
  for (auto& s : slots_) {
    if (s.link == link) drain(s);
  }
  maybe_setup();
}

void Kms::maybe_setup() {
  if (setup_sent_) return;
  bool ready = false;
  for (const auto& s : slots_) {
    ready = ready || f_.stores[s.link].available() >= f_.params.kms.setup_threshold;
  }
  if (!ready) return;
  setup_sent_ = true;
  send_cm(f_.new_cm(MsgKind::setup, node_, f_.controller_id));
  const SimTime period = f_.params.kms.link_status_period;
  if (!period.is_max()) f_.sim.schedule(period, self_, kLinkStatus);
}

void Kms::handle(const Event& ev) {
  switch (ev.tag) {
    case kDepart:
      depart(static_cast<MsgId>(ev.arg));
      break;
    case kLinkStatus:
      ++link_status_sent_;
      send_cm(f_.new_cm(MsgKind::link_status, node_, f_.controller_id));
      f_.sim.schedule(f_.params.kms.link_status_period, self_, kLinkStatus);
      break;
    default:
      throw SimulationFault(fmt::format("kms/{}: unknown event tag {}", node_, ev.tag));
  }
}

}  // namespace qkdn
