#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "qkdn/sim_time.hpp"
#include "qkdn/types.hpp"

namespace qkdn {

enum class MsgKind : std::uint8_t {
  key_transport,
  transport_ack,
  setup,
  link_status,
  route_request,
  route_reply,
  table_push,
  route_init,
  negotiate,
  negotiate_ack,
};

std::string_view to_string(MsgKind k);

/// Control-and-management traffic between agents and the controller.
inline bool is_cm(MsgKind k) {
  return k == MsgKind::setup || k == MsgKind::link_status || k == MsgKind::route_request ||
         k == MsgKind::route_reply || k == MsgKind::table_push || k == MsgKind::route_init;
}

using MsgId = std::uint32_t;

struct Message {
  MsgKind kind = MsgKind::key_transport;
  NodeId origin = 0;
  NodeId destination = 0;
  /// Next node the message is headed for while it sits in a KMS.
  NodeId next_hop = -1;
  /// Key transport id, session id or controller log index depending on kind.
  std::uint32_t ref = 0;
  /// Transport id riding on a routing request or reply.
  std::uint32_t aux = 0;
  /// Destination a routing request asks about.
  NodeId subject = -1;
  std::uint32_t bundle = 0;
  SimTime created;
  /// Source route for reactive transports and their acks; walked backwards
  /// when `reverse` is set.
  const std::vector<NodeId>* route = nullptr;
  std::uint16_t pos = 0;
  bool reverse = false;
  /// KM hops this message has been charged a key for.
  std::uint16_t keys_charged = 0;
  std::uint16_t km_hops = 0;
};

/// Slab of in-flight messages addressed by index; events carry the index.
class MessagePool {
 public:
  MsgId alloc(const Message& m);
  Message& operator[](MsgId id) { return slots_[id]; }
  const Message& operator[](MsgId id) const { return slots_[id]; }
  void release(MsgId id) { free_.push_back(id); }
  std::size_t live() const { return slots_.size() - free_.size(); }

 private:
  std::vector<Message> slots_;
  std::vector<MsgId> free_;
};

}  // namespace qkdn
