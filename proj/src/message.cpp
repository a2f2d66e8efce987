#include "qkdn/message.hpp"

namespace qkdn {

std::string_view to_string(MsgKind k) {
  switch (k) {
    case MsgKind::key_transport: return "key_transport";
    case MsgKind::transport_ack: return "transport_ack";
    case MsgKind::setup: return "setup";
    case MsgKind::link_status: return "link_status";
    case MsgKind::route_request: return "route_request";
    case MsgKind::route_reply: return "route_reply";
    case MsgKind::table_push: return "table_push";
    case MsgKind::route_init: return "route_init";
    case MsgKind::negotiate: return "negotiate";
    case MsgKind::negotiate_ack: return "negotiate_ack";
  }
  return "?";
}

MsgId MessagePool::alloc(const Message& m) {
  if (!free_.empty()) {
    const MsgId id = free_.back();
    free_.pop_back();
    slots_[id] = m;
    return id;
  }
  slots_.push_back(m);
  return static_cast<MsgId>(slots_.size() - 1);
}

}  // namespace qkdn
