#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qkdn/kernel.hpp"
#include "qkdn/message.hpp"
#include "qkdn/rng.hpp"
#include "qkdn/topology.hpp"

namespace qkdn {

enum class ChannelLayer : std::uint8_t { application, key_management, management, controller };

std::string_view to_string(ChannelLayer l);

struct ChannelConfig {
  SimTime backoff_mean = seconds(3);
  /// When set, the two directions of a link never contend.
  bool full_duplex = false;

  bool operator==(const ChannelConfig&) const = default;
};

struct LinkCounters {
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t backoffs = 0;
};

class DeliverySink {
 public:
  virtual ~DeliverySink() = default;
  virtual void on_delivered(ChannelLayer layer, NodeId at, NodeId from, MsgId msg) = 0;
  virtual void on_dropped(ChannelLayer layer, NodeId from, MsgId msg) = 0;
};

/// node -> (destination -> next hop)
using RoutingTables = std::map<NodeId, std::map<NodeId, NodeId>>;

/// One set of classical links (one per layer).
///
/// A link is a half-duplex medium: a transmission collides when the other
/// endpoint started one on the same link at the same instant, and the
/// later sender retries after an exponential backoff. Transmissions from the
/// same endpoint are serialized by the sender and never collide.
class ClassicalChannel : public EventHandler {
 public:
  ClassicalChannel(Simulator& sim, ChannelLayer layer, const std::vector<LinkSpec>& links,
                   const ChannelConfig& cfg, std::uint64_t seed, MessagePool& pool,
                   DeliverySink& sink);

  /// One hop to a neighbour. Throws ParameterError when no such link exists.
  void transmit(NodeId from, NodeId to, MsgId msg);
  /// Layer-2 forwarding toward msg.destination using the installed tables;
  /// every intermediate node forwards on arrival. A missing entry counts
  /// as a dead letter and the message is dropped.
  void send(NodeId from, MsgId msg);
  /// Replaces all tables at once. Throws ParameterError, leaving the old
  /// tables in place, if any entry names an unknown node or a next hop that
  /// is not a neighbour.
  void install_routes(const RoutingTables& tables);
  std::optional<NodeId> next_hop(NodeId at, NodeId destination) const;

  void handle(const Event& ev) override;

  ChannelLayer layer() const { return layer_; }
  bool has_link(NodeId a, NodeId b) const { return find(a, b).has_value(); }
  SimTime delay(NodeId a, NodeId b) const;
  const std::vector<LinkSpec>& links() const { return links_; }
  const std::vector<LinkCounters>& counters() const { return counters_; }
  LinkCounters totals() const;
  std::uint64_t dead_letters() const { return dead_letters_; }

 private:
  enum Tag : std::uint32_t { kDeliver, kDeliverRouted, kRetry, kRetryRouted };

  struct LinkState {
    SimTime last_tx[2] = {SimTime{-1}, SimTime{-1}};
    RngStream backoff;
  };

  std::optional<std::size_t> find(NodeId a, NodeId b) const;
  void attempt(std::size_t link, int side, MsgId msg, bool routed);
  static std::uint64_t pack(MsgId msg, std::size_t link, int side);

  Simulator& sim_;
  ChannelLayer layer_;
  ChannelConfig cfg_;
  MessagePool& pool_;
  DeliverySink& sink_;
  HandlerId self_ = 0;
  std::vector<LinkSpec> links_;
  std::vector<LinkState> state_;
  std::vector<LinkCounters> counters_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
  std::vector<NodeId> known_nodes_;
  RoutingTables tables_;
  RngStream loss_;
  std::uint64_t dead_letters_ = 0;
};

}  // namespace qkdn
