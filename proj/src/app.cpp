#include "qkdn/app.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "qkdn/errors.hpp"
#include "qkdn/kms.hpp"

namespace qkdn {

NetworkEncryptor::NetworkEncryptor(Fabric& f, NodeId node)
    : f_(f), node_(node), retry_rng_(f.params.seed, fmt::format("rekey-retry/{}", node)) {
  self_ = f_.sim.add_handler(*this, fmt::format("ne/{}", node));
}

void NetworkEncryptor::on_routes() {
  if (started_) return;
  started_ = true;
  for (std::uint32_t id : masters_) {
    f_.sim.schedule(f_.sessions[id].start_offset, self_, kStart, id);
  }
}

void NetworkEncryptor::negotiate(Session& s) {
  Message m;
  m.kind = MsgKind::negotiate;
  m.origin = s.master;
  m.destination = s.slave;
  m.ref = s.id;
  m.created = f_.sim.now();
  f_.app->send(node_, f_.pool.alloc(m));
}

void NetworkEncryptor::on_app_message(MsgId id) {
  Message& m = f_.pool[id];
  if (m.kind == MsgKind::negotiate) {
    m.kind = MsgKind::negotiate_ack;
    std::swap(m.origin, m.destination);
    f_.app->send(node_, id);
    return;
  }
  if (m.kind != MsgKind::negotiate_ack) {
    throw SimulationFault(fmt::format("ne/{}: unexpected {}", node_, to_string(m.kind)));
  }
  Session& s = f_.sessions[m.ref];
  f_.pool.release(id);
  s.negotiated = true;
  maybe_request(s);
}

void NetworkEncryptor::on_app_dropped(MsgId id) {
  const std::uint32_t sid = f_.pool[id].ref;
  f_.pool.release(id);
  f_.sim.schedule(retry_rng_.exponential(f_.params.ne.retry_mean), self_, kRetryNegotiate, sid);
}

void NetworkEncryptor::maybe_request(Session& s) {
  const NeConfig& c = f_.params.ne;
  if (!s.negotiated || s.outstanding) return;
  if (s.cache > c.refill_threshold || s.cache + c.keys_per_request > c.cache_capacity) return;
  s.outstanding = true;
  ++s.requests;
  f_.kms_at(node_).request_key_transport(s.slave, c.keys_per_request, s.id);
}

void NetworkEncryptor::activate(Session& s) {
  const SimTime now = f_.sim.now();
  --s.cache;
  ++s.consumed;
  s.key_active = true;
  s.active_from = now;
  const SimTime life = f_.params.ne.key_lifetime;
  s.active_until = life.is_max() ? SimTime::max() : now + life;
  if (!life.is_max()) f_.sim.schedule(life, self_, kExpire, s.id);
  maybe_request(s);
}

void NetworkEncryptor::serve_active(Session& s, SimTime until) {
  if (!s.key_active) return;
  const SimTime stop = std::min(until, s.active_until);
  if (s.forward) s.forward->serve(s.active_from, stop, f_.end);
  if (s.backward) s.backward->serve(s.active_from, stop, f_.end);
}

void NetworkEncryptor::on_bundle_acked(std::uint32_t sid, std::uint32_t keys) {
  Session& s = f_.sessions[sid];
  s.outstanding = false;
  s.cache += keys;
  if (!s.forward) {
    const NeConfig& c = f_.params.ne;
    s.forward.emplace(f_.sim.now(), c.packet_interval(), c.encryption_latency, s.path_delay);
    f_.session_connected();
  }
  if (!s.key_active) activate(s);
  maybe_request(s);
}

void NetworkEncryptor::on_bundle_arrived(std::uint32_t sid) {
  Session& s = f_.sessions[sid];
  if (!s.bidirectional || s.backward) return;
  const NeConfig& c = f_.params.ne;
  s.backward.emplace(f_.sim.now(), c.packet_interval(), c.encryption_latency, s.path_delay);
}

void NetworkEncryptor::on_transport_failed(std::uint32_t sid) {
  Session& s = f_.sessions[sid];
  s.outstanding = false;
  ++s.failures;
  f_.sim.schedule(retry_rng_.exponential(f_.params.ne.retry_mean), self_, kRetryRequest, sid);
}

void NetworkEncryptor::finish(SimTime end) {
  for (std::uint32_t id : masters_) {
    Session& s = f_.sessions[id];
    serve_active(s, end);
    s.key_active = false;
    if (s.forward) s.forward->finish(end);
    if (s.backward) s.backward->finish(end);
  }
}

void NetworkEncryptor::handle(const Event& ev) {
  Session& s = f_.sessions.at(ev.arg);
  switch (ev.tag) {
    case kStart:
    case kRetryNegotiate:
      negotiate(s);
      break;
    case kExpire:
      serve_active(s, s.active_until);
      s.key_active = false;
      if (s.cache > 0) activate(s);
      break;
    case kRetryRequest:
      maybe_request(s);
      break;
    default:
      throw SimulationFault(fmt::format("ne/{}: unknown event tag {}", node_, ev.tag));
  }
}

}  // namespace qkdn
