#pragma once

#include <cstdint>
#include <deque>
#include <unordered_map>
#include <vector>

#include "qkdn/fabric.hpp"
#include "qkdn/kernel.hpp"

namespace qkdn {

/// Key management system of one node.
///
/// Outbound KM messages wait in a FIFO per outgoing link until that link
/// holds a key of this node's encryption parity (if the message needs one),
/// then pass one serial encryption stage shared by all links of the node.
/// Key transports are charged one QKD key per hop whatever the bundle size.
/// In CM-via-KMS the same queues carry control-and-management messages,
/// charged per the CM packet-to-key ratio.
class Kms : public EventHandler {
 public:
  Kms(Fabric& f, NodeId node);

  NodeId node() const { return node_; }
  void handle(const Event& ev) override;

  /// Starts a transport of `n_keys` fresh RNG keys to `dst` on behalf of
  /// an NE session. Returns the transport id.
  std::uint32_t request_key_transport(NodeId dst, std::uint32_t n_keys, std::uint32_t session);

  void on_keys(LinkIndex link);
  /// A message arrived over a KM link.
  void on_km_message(MsgId msg);
  /// A CM message from the controller reached this node, over the
  /// management star (SP) or the controller link (gateway).
  void on_cm_from_controller(MsgId msg);
  /// Agent-originated CM message headed for the controller.
  void send_cm(MsgId msg);
  /// Forwards a CM message one hop through the KM graph. CM-via-KMS only;
  /// throws ParameterError otherwise.
  void relay_cm(MsgId msg);
  /// A routing request or reply of transport `t` was lost.
  void abort_vector_wait(std::uint32_t t);

  bool routed() const { return routed_; }
  bool setup_sent() const { return setup_sent_; }
  std::size_t pending_km() const { return pending_km_; }
  std::size_t pending_cm() const { return pending_cm_; }
  std::uint64_t link_status_sent() const { return link_status_sent_; }
  std::uint64_t processed() const { return processed_; }

 private:
  enum Tag : std::uint32_t { kDepart, kLinkStatus };

  struct Slot {
    LinkIndex link = 0;
    NodeId peer = 0;
    Parity parity = Parity::even;  // encryption parity of this node
    std::deque<MsgId> wait;
    std::uint64_t cm_packets = 0;
  };

  void route(MsgId id);
  void enqueue(MsgId id, NodeId next);
  void drain(Slot& s);
  bool needs_key(const Message& m, const Slot& s) const;
  void depart(MsgId id);
  void deliver_local(MsgId id);
  void start_transport(std::uint32_t t, const std::vector<NodeId>* route);
  void install_routes();
  void maybe_setup();
  void custody(const Message& m, int delta);

  Fabric& f_;
  NodeId node_;
  HandlerId self_ = 0;
  std::vector<Slot> slots_;
  std::unordered_map<NodeId, std::size_t> slot_of_;
  SimTime busy_until_;
  std::deque<MsgId> parked_;
  bool routed_ = false;
  bool setup_sent_ = false;
  std::size_t pending_km_ = 0;
  std::size_t pending_cm_ = 0;
  std::uint64_t link_status_sent_ = 0;
  std::uint64_t processed_ = 0;
};

}  // namespace qkdn
