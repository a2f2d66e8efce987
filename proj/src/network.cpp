#include "qkdn/network.hpp"

#include <algorithm>
#include <memory>

#include <fmt/format.h>

#include "qkdn/app.hpp"
#include "qkdn/control.hpp"
#include "qkdn/errors.hpp"
#include "qkdn/kms.hpp"
#include "qkdn/rng.hpp"

namespace qkdn {

std::vector<SessionSpec> plan_sessions(const TopologySpec& topo, const TrafficConfig& traffic,
                                       std::uint64_t seed) {
  const auto access = topo.access_nodes();
  std::vector<SessionSpec> out;
  switch (traffic.pattern) {
    case TrafficPattern::all_pairs:
      for (NodeId a : access) {
        for (NodeId b : access) {
          if (a != b) out.push_back({a, b, false});
        }
      }
      break;
    case TrafficPattern::single_peer: {
      if (access.size() < 2) break;
      RngStream rng(seed, "traffic/peers");
      for (std::size_t i = 0; i < access.size(); ++i) {
        std::size_t j = rng.index(access.size() - 1);
        if (j >= i) ++j;
        out.push_back({access[i], access[j], false});
      }
      break;
    }
    case TrafficPattern::explicit_sessions:
      out = traffic.sessions;
      break;
  }
  for (const auto& s : out) {
    if (s.master == s.slave) throw ParameterError("a session needs two distinct nodes");
    for (NodeId n : {s.master, s.slave}) {
      if (!topo.has_node(n) || topo.node(n).kind == NodeKind::controller ||
          topo.node(n).kind == NodeKind::gateway) {
        throw ParameterError(fmt::format("session endpoint {} is not an access point", n));
      }
    }
  }
  return out;
}

bool RunResult::conserved() const {
  return std::all_of(links.begin(), links.end(), [](const LinkReport& l) { return l.conserved; });
}

const LinkReport* RunResult::link(NodeId a, NodeId b) const {
  for (const auto& l : links) {
    if ((l.a == std::min(a, b)) && (l.b == std::max(a, b))) return &l;
  }
  return nullptr;
}

namespace {

void check_topology(const TopologySpec& topo, const NetworkParams& p) {
  topo.validate();
  if (!topo.controller()) throw ParameterError("topology has no controller; attach one first");
  if (p.architecture == CmArchitecture::separately_protected) {
    if (topo.gateway()) throw ParameterError("SP networks have no gateway");
    for (NodeId n : topo.km_nodes()) {
      bool found = false;
      for (const auto& l : topo.management_links) {
        found = found || l.a == n || l.b == n;
      }
      if (!found) throw ParameterError(fmt::format("node {} lacks a management link", n));
    }
  } else {
    if (!topo.gateway()) throw ParameterError("CM-via-KMS needs a gateway node");
    if (topo.controller_links.size() != 1) {
      throw ParameterError("CM-via-KMS needs exactly one controller link");
    }
  }
}

/// Owns one run: wires the layers, dispatches channel deliveries and key
/// batches, and samples queue lengths.
class NetworkRun : public KeySink, public DeliverySink, public EventHandler {
 public:
  NetworkRun(const TopologySpec& topo, const NetworkParams& p)
      : topo_(topo), p_(p), fabric_(sim_, topo_, p_) {
    sampler_ = sim_.add_handler(*this, "sampler");
    build();
  }

  RunResult run(std::ostream* trace);

  void on_keys(LinkIndex link, std::uint64_t first_id, std::uint64_t count) override {
    fabric_.stores[link].push(first_id, count);
    const auto& l = topo_.links[link];
    fabric_.kms_at(l.a).on_keys(link);
    fabric_.kms_at(l.b).on_keys(link);
  }

  void on_delivered(ChannelLayer layer, NodeId at, NodeId, MsgId msg) override {
    switch (layer) {
      case ChannelLayer::key_management:
        fabric_.kms_at(at).on_km_message(msg);
        break;
      case ChannelLayer::management:
      case ChannelLayer::controller:
        if (at == fabric_.controller_id) {
          fabric_.controller->on_message(msg);
        } else {
          fabric_.kms_at(at).on_cm_from_controller(msg);
        }
        break;
      case ChannelLayer::application: {
        auto* ne = fabric_.ne_at(at);
        if (!ne) throw SimulationFault(fmt::format("node {} has no network encryptor", at));
        ne->on_app_message(msg);
        break;
      }
    }
  }

  void on_dropped(ChannelLayer layer, NodeId, MsgId id) override {
    const Message& m = fabric_.pool[id];
    if (layer == ChannelLayer::application) {
      fabric_.ne_at(fabric_.sessions.at(m.ref).master)->on_app_dropped(id);
      return;
    }
    if (is_cm(m.kind)) {
      fabric_.cm_log[m.ref].lost = true;
      if (m.kind == MsgKind::route_request || m.kind == MsgKind::route_reply) {
        fabric_.kms_at(fabric_.transports[m.aux].src).abort_vector_wait(m.aux);
      }
    } else if (m.kind == MsgKind::key_transport || m.kind == MsgKind::transport_ack) {
      Transport& t = fabric_.transports[m.ref];
      t.failed = true;
      if (auto* ne = fabric_.ne_at(t.src)) ne->on_transport_failed(t.session);
    }
    fabric_.pool.release(id);
  }

  void handle(const Event&) override {
    sample();
    const SimTime next = sim_.now() + p_.queue_sample_interval;
    if (next <= fabric_.end) sim_.schedule(p_.queue_sample_interval, sampler_, 0);
  }

 private:
  void build();
  void sample();
  RunResult collect(const RunReport& kernel);

  Simulator sim_;
  TopologySpec topo_;
  NetworkParams p_;
  Fabric fabric_;
  HandlerId sampler_ = 0;
  std::vector<std::unique_ptr<QkdLink>> qkd_;
  std::vector<NodeId> km_nodes_;
  std::vector<TimeAverage> queue_;
  std::vector<TimeAverage> cm_queue_;
  std::vector<std::vector<LinkIndex>> incident_;
  std::vector<KmsSample> kms_trace_;
};

void NetworkRun::build() {
  Fabric& f = fabric_;
  const std::uint64_t seed = p_.seed;
  f.km = std::make_unique<ClassicalChannel>(sim_, ChannelLayer::key_management, topo_.links,
                                            p_.channel, seed, f.pool, *this);
  std::vector<LinkSpec> app_links;
  for (const auto& l : topo_.links) {
    if (l.a != f.gateway_id && l.b != f.gateway_id) app_links.push_back(l);
  }
  f.app = std::make_unique<ClassicalChannel>(sim_, ChannelLayer::application, app_links,
                                             p_.channel, seed, f.pool, *this);
  f.mgmt = std::make_unique<ClassicalChannel>(sim_, ChannelLayer::management,
                                              topo_.management_links, p_.channel, seed, f.pool,
                                              *this);
  f.ctrl = std::make_unique<ClassicalChannel>(sim_, ChannelLayer::controller,
                                              topo_.controller_links, p_.channel, seed, f.pool,
                                              *this);

  km_nodes_ = topo_.km_nodes();
  NodeId max_id = 0;
  for (const auto& n : topo_.nodes) max_id = std::max(max_id, n.id);
  f.kms.resize(static_cast<std::size_t>(max_id) + 1);
  f.ne.resize(static_cast<std::size_t>(max_id) + 1);
  for (NodeId n : km_nodes_) f.kms[static_cast<std::size_t>(n)] = std::make_unique<Kms>(f, n);
  f.controller = std::make_unique<Controller>(f, f.controller_id);
  queue_.resize(km_nodes_.size());
  cm_queue_.resize(km_nodes_.size());
  incident_.resize(km_nodes_.size());
  for (std::size_t i = 0; i < km_nodes_.size(); ++i) {
    for (std::size_t l = 0; l < topo_.links.size(); ++l) {
      if (topo_.links[l].a == km_nodes_[i] || topo_.links[l].b == km_nodes_[i]) {
        incident_[i].push_back(static_cast<LinkIndex>(l));
      }
    }
  }

  const auto plan = plan_sessions(topo_, p_.traffic, seed);
  RngStream phase(seed, "traffic/phase");
  const NeConfig& ne = p_.ne;
  for (const auto& spec : plan) {
    Session s;
    s.id = static_cast<std::uint32_t>(f.sessions.size());
    s.master = spec.master;
    s.slave = spec.slave;
    s.bidirectional = spec.bidirectional;
    const auto& r = f.app_routes.route(spec.master, spec.slave);
    if (r.empty()) {
      throw ParameterError(fmt::format("no application path {}->{}", spec.master, spec.slave));
    }
    SimTime d;
    for (std::size_t i = 1; i < r.size(); ++i) d += f.app->delay(r[i - 1], r[i]);
    s.path_delay = d;
    if (p_.traffic.phase_offsets && !ne.key_lifetime.is_max()) {
      const double span = ne.key_lifetime.seconds() * ne.keys_per_request;
      s.start_offset = SimTime::from_s(phase.uniform() * span);
    }
    for (NodeId n : {spec.master, spec.slave}) {
      auto& slot = f.ne[static_cast<std::size_t>(n)];
      if (!slot) slot = std::make_unique<NetworkEncryptor>(f, n);
    }
    f.ne[static_cast<std::size_t>(spec.master)]->add_master_session(s.id);
    f.sessions.push_back(std::move(s));
  }

  RngStream qkd_phase(seed, "qkd/phase");
  for (std::size_t i = 0; i < topo_.links.size(); ++i) {
    const auto& l = topo_.links[i];
    if (l.key_rate <= 0.0) continue;
    QkdModuleConfig c;
    c.link = static_cast<LinkIndex>(i);
    c.key_rate = l.key_rate;
    c.jitter = p_.qkd.jitter;
    c.post_processing = p_.qkd.post_processing;
    c.key_size = p_.qkd.key_size;
    c.tick = p_.qkd.tick;
    if (p_.qkd.random_phase) c.start_offset = SimTime::from_s(qkd_phase.uniform() * c.tick.seconds());
    auto link = std::make_unique<QkdLink>(sim_, c, seed, *this);
    link->enable_trace(p_.record_traces);
    qkd_.push_back(std::move(link));
  }

  f.on_setup_complete = [this] {
    Fabric& fb = fabric_;
    if (p_.effective_time) {
      fb.end = std::min(p_.total_time, *fb.setup_complete + *p_.effective_time);
      sim_.stop_at(fb.end);
    }
    sim_.schedule(SimTime::zero(), sampler_, 0);
  };
}

void NetworkRun::sample() {
  const SimTime now = sim_.now();
  for (std::size_t i = 0; i < km_nodes_.size(); ++i) {
    const Kms& k = fabric_.kms_at(km_nodes_[i]);
    queue_[i].sample(now, static_cast<double>(k.pending_km()));
    cm_queue_[i].sample(now, static_cast<double>(k.pending_cm()));
  }
  if (!p_.record_traces) return;
  for (std::size_t i = 0; i < km_nodes_.size(); ++i) {
    const Kms& k = fabric_.kms_at(km_nodes_[i]);
    KmsSample s;
    s.at = now;
    s.node = km_nodes_[i];
    s.pending_km = k.pending_km();
    s.pending_cm = k.pending_cm();
    for (LinkIndex l : incident_[i]) {
      const KeyStore& st = fabric_.stores[l];
      s.stored += st.available();
      s.consumed += st.consumed();
      s.relayed_bundles += fabric_.link_use[l].relayed_bundles;
    }
    kms_trace_.push_back(s);
  }
}

RunResult NetworkRun::run(std::ostream* trace) {
  sim_.set_trace_stream(trace);
  for (auto& q : qkd_) q->start();
  const RunReport kernel = sim_.run(p_.total_time);
  if (!fabric_.setup_complete) fabric_.end = p_.total_time;
  for (auto& ne : fabric_.ne) {
    if (ne) ne->finish(fabric_.end);
  }
  return collect(kernel);
}

RunResult NetworkRun::collect(const RunReport& kernel) {
  Fabric& f = fabric_;
  RunResult r;
  r.setup_complete = f.setup_complete;
  r.end = f.end;
  r.kernel = kernel;

  std::vector<NodeMetrics> nodes(km_nodes_.size());
  std::vector<std::size_t> slot(f.kms.size(), 0);
  for (std::size_t i = 0; i < km_nodes_.size(); ++i) {
    nodes[i].node = km_nodes_[i];
    nodes[i].kind = topo_.node(km_nodes_[i]).kind;
    nodes[i].n_msg_km = queue_[i].value();
    nodes[i].n_cm = cm_queue_[i].value();
    slot[static_cast<std::size_t>(km_nodes_[i])] = i;
  }
  auto node_of = [&](NodeId n) -> NodeMetrics& { return nodes[slot[static_cast<std::size_t>(n)]]; };

  for (const auto& s : f.sessions) {
    SessionReport sr;
    sr.master = s.master;
    sr.slave = s.slave;
    sr.bidirectional = s.bidirectional;
    sr.consumed = s.consumed;
    sr.requests = s.requests;
    sr.failures = s.failures;
    if (s.forward) {
      sr.tx = s.forward->tx();
      sr.rx = s.forward->rx();
      sr.traffic_start = s.forward->start();
      node_of(s.master).t_msg_ne.add_many(
          static_cast<double>(s.forward->latency_sum_ns()) * 1e-9, s.forward->samples());
    }
    if (s.backward) {
      sr.tx_back = s.backward->tx();
      sr.rx_back = s.backward->rx();
      node_of(s.slave).t_msg_ne.add_many(
          static_cast<double>(s.backward->latency_sum_ns()) * 1e-9, s.backward->samples());
    }
    r.sessions.push_back(sr);
  }

  // Transports still under way at the end are censored at the end time so
  // that stalls show up in the means instead of vanishing from them.
  for (const auto& t : f.transports) {
    ++r.transports.requested;
    r.transports.delivered += t.delivered.ns() >= 0;
    r.transports.acked += t.acked.ns() >= 0;
    r.transports.failed += t.failed;
    if (t.failed || !f.setup_complete || t.requested < *f.setup_complete) continue;
    const SimTime delivered = t.delivered.ns() >= 0 ? t.delivered : f.end;
    const SimTime acked = t.acked.ns() >= 0 ? t.acked : f.end;
    node_of(t.src).t_msg_km.add((delivered - t.requested).seconds());
    node_of(t.src).t_key.add((acked - t.requested).seconds());
  }
  r.metrics = aggregate(std::move(nodes));

  for (std::size_t i = 0; i < topo_.links.size(); ++i) {
    const auto& l = topo_.links[i];
    const KeyStore& st = f.stores[i];
    LinkReport lr;
    lr.a = l.a;
    lr.b = l.b;
    lr.key_rate = l.key_rate;
    lr.generated = st.generated();
    lr.consumed = st.consumed();
    lr.consumed_transport = st.consumed(KeyUse::transport);
    lr.consumed_ack = st.consumed(KeyUse::ack);
    lr.consumed_cm = st.consumed(KeyUse::cm);
    lr.available = st.available();
    lr.discarded = st.discarded();
    lr.relayed_bundles = f.link_use[i].relayed_bundles;
    lr.relayed_keys = f.link_use[i].relayed_keys;
    lr.backoffs = f.km->counters()[i].backoffs;
    lr.conserved = st.conserved();
    r.links.push_back(std::move(lr));
  }
  for (const auto& q : qkd_) {
    r.links[q->config().link].generation_trace = q->trace();
  }

  CmSummary& cm = r.cm;
  for (const auto& l : r.links) cm.keys_consumed += l.consumed_cm;
  for (const auto& rec : f.cm_log) {
    ++cm.messages;
    cm.keys_logged += rec.keys_charged;
    cm.lost += rec.lost;
    switch (rec.kind) {
      case MsgKind::table_push:
        ++cm.table_pushes;
        if (rec.delivered.ns() >= 0) ++cm.pushes_received[rec.destination];
        break;
      case MsgKind::route_request: ++cm.vector_requests; break;
      case MsgKind::route_reply: ++cm.vector_replies; break;
      case MsgKind::link_status:
        ++cm.link_status;
        ++cm.link_status_sent[rec.origin];
        break;
      case MsgKind::setup: ++cm.setup; break;
      default: break;
    }
    if (rec.delivered.ns() >= 0) {
      ++cm.delivered;
      cm.delivered_path_hops += rec.path_hops;
      const std::uint16_t expected = f.via_kms() ? rec.path_hops : 0;
      if (rec.keys_charged != expected) ++cm.hop_mismatches;
    }
  }
  r.cm_log = f.cm_log;
  r.kms_trace = std::move(kms_trace_);

  r.channels[ChannelLayer::key_management] = f.km->totals();
  r.channels[ChannelLayer::application] = f.app->totals();
  r.channels[ChannelLayer::management] = f.mgmt->totals();
  r.channels[ChannelLayer::controller] = f.ctrl->totals();
  r.dead_letters = f.km->dead_letters() + f.app->dead_letters() + f.mgmt->dead_letters() +
                   f.ctrl->dead_letters();
  r.duplicate_key_uses = f.ledger.duplicates();
  r.keys_recorded = f.ledger.recorded();
  return r;
}

}  // namespace

RunResult run_network(const TopologySpec& topo, const NetworkParams& params, std::ostream* trace) {
  params.validate();
  check_topology(topo, params);
  NetworkRun run(topo, params);
  return run.run(trace);
}

}  // namespace qkdn
