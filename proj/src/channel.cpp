#include "qkdn/channel.hpp"

#include <algorithm>
#include <string>

#include <fmt/format.h>

#include "qkdn/errors.hpp"

namespace qkdn {

namespace {

std::uint64_t pair_key(NodeId a, NodeId b) {
  const auto lo = static_cast<std::uint32_t>(std::min(a, b));
  const auto hi = static_cast<std::uint32_t>(std::max(a, b));
  return (std::uint64_t{lo} << 32) | hi;
}

}  // namespace

std::string_view to_string(ChannelLayer l) {
  switch (l) {
    case ChannelLayer::application: return "application";
    case ChannelLayer::key_management: return "key_management";
    case ChannelLayer::management: return "management";
    case ChannelLayer::controller: return "controller";
  }
  return "?";
}

ClassicalChannel::ClassicalChannel(Simulator& sim, ChannelLayer layer,
                                   const std::vector<LinkSpec>& links, const ChannelConfig& cfg,
                                   std::uint64_t seed, MessagePool& pool, DeliverySink& sink)
    : sim_(sim),
      layer_(layer),
      cfg_(cfg),
      pool_(pool),
      sink_(sink),
      links_(links),
      counters_(links.size()),
      loss_(seed, fmt::format("loss/{}", to_string(layer))) {
  if (cfg_.backoff_mean <= SimTime::zero()) throw ParameterError("backoff mean must be positive");
  self_ = sim_.add_handler(*this, fmt::format("channel/{}", to_string(layer)));
  state_.reserve(links_.size());
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const auto& l = links_[i];
    if (!index_.emplace(pair_key(l.a, l.b), i).second) {
      throw ParameterError(fmt::format("duplicate channel link {}-{}", l.a, l.b));
    }
    state_.push_back(
        {{SimTime{-1}, SimTime{-1}},
         RngStream(seed, fmt::format("backoff/{}/{}-{}", to_string(layer), l.a, l.b))});
    known_nodes_.push_back(l.a);
    known_nodes_.push_back(l.b);
  }
  std::sort(known_nodes_.begin(), known_nodes_.end());
  known_nodes_.erase(std::unique(known_nodes_.begin(), known_nodes_.end()), known_nodes_.end());
}

std::optional<std::size_t> ClassicalChannel::find(NodeId a, NodeId b) const {
  const auto it = index_.find(pair_key(a, b));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SimTime ClassicalChannel::delay(NodeId a, NodeId b) const {
  const auto i = find(a, b);
  if (!i) throw ParameterError(fmt::format("no {} link {}-{}", to_string(layer_), a, b));
  return links_[*i].delay;
}

std::uint64_t ClassicalChannel::pack(MsgId msg, std::size_t link, int side) {
  return std::uint64_t{msg} | (std::uint64_t{link} << 32) | (std::uint64_t(side) << 63);
}

void ClassicalChannel::transmit(NodeId from, NodeId to, MsgId msg) {
  const auto i = find(from, to);
  if (!i) throw ParameterError(fmt::format("no {} link {}-{}", to_string(layer_), from, to));
  attempt(*i, links_[*i].a == from ? 0 : 1, msg, false);
}

void ClassicalChannel::send(NodeId from, MsgId msg) {
  const NodeId dst = pool_[msg].destination;
  const auto hop = next_hop(from, dst);
  if (!hop) {
    ++dead_letters_;
    sink_.on_dropped(layer_, from, msg);
    return;
  }
  const auto i = find(from, *hop);
  attempt(*i, links_[*i].a == from ? 0 : 1, msg, true);
}

void ClassicalChannel::attempt(std::size_t link, int side, MsgId msg, bool routed) {
  const SimTime now = sim_.now();
  LinkState& st = state_[link];
  LinkCounters& c = counters_[link];
  if (!cfg_.full_duplex && st.last_tx[1 - side] == now) {
    ++c.backoffs;
    sim_.schedule(st.backoff.exponential(cfg_.backoff_mean), self_, routed ? kRetryRouted : kRetry,
                  pack(msg, link, side));
    return;
  }
  st.last_tx[side] = now;
  ++c.sent;
  const double p = links_[link].loss_probability;
  if (p > 0.0 && loss_.uniform() < p) {
    ++c.dropped;
    sink_.on_dropped(layer_, side == 0 ? links_[link].a : links_[link].b, msg);
    return;
  }
  sim_.schedule(links_[link].delay, self_, routed ? kDeliverRouted : kDeliver,
                pack(msg, link, side));
}

void ClassicalChannel::handle(const Event& ev) {
  const auto msg = static_cast<MsgId>(ev.arg & 0xffffffffULL);
  const auto link = static_cast<std::size_t>((ev.arg >> 32) & 0x7fffffffULL);
  const int side = static_cast<int>(ev.arg >> 63);
  const bool routed = ev.tag == kDeliverRouted || ev.tag == kRetryRouted;
  if (ev.tag == kRetry || ev.tag == kRetryRouted) {
    attempt(link, side, msg, routed);
    return;
  }
  ++counters_[link].delivered;
  const NodeId from = side == 0 ? links_[link].a : links_[link].b;
  const NodeId at = side == 0 ? links_[link].b : links_[link].a;
  if (routed && pool_[msg].destination != at) {
    send(at, msg);
    return;
  }
  sink_.on_delivered(layer_, at, from, msg);
}

void ClassicalChannel::install_routes(const RoutingTables& tables) {
  auto known = [this](NodeId n) {
    return std::binary_search(known_nodes_.begin(), known_nodes_.end(), n);
  };
  for (const auto& [node, table] : tables) {
    if (!known(node)) throw ParameterError(fmt::format("routing table for unknown node {}", node));
    for (const auto& [dst, hop] : table) {
      if (!known(dst)) {
        throw ParameterError(fmt::format("node {}: route to unknown node {}", node, dst));
      }
      if (!find(node, hop)) {
        throw ParameterError(fmt::format("node {}: next hop {} is not a neighbour", node, hop));
      }
    }
  }
  tables_ = tables;
}

std::optional<NodeId> ClassicalChannel::next_hop(NodeId at, NodeId destination) const {
  const auto t = tables_.find(at);
  if (t == tables_.end()) return std::nullopt;
  const auto h = t->second.find(destination);
  if (h == t->second.end()) return std::nullopt;
  return h->second;
}

LinkCounters ClassicalChannel::totals() const {
  LinkCounters t;
  for (const auto& c : counters_) {
    t.sent += c.sent;
    t.delivered += c.delivered;
    t.dropped += c.dropped;
    t.backoffs += c.backoffs;
  }
  return t;
}

}  // namespace qkdn
