#pragma once

#include <cstdint>
#include <vector>

#include "qkdn/fabric.hpp"
#include "qkdn/kernel.hpp"
#include "qkdn/rng.hpp"

namespace qkdn {

/// Network encryptor of one access node.
///
/// Each session runs a CBR flow encrypted with keys pulled from the local
/// KMS. The session key is replaced when its lifetime ends; a new bundle is
/// requested once the cache falls to the refill threshold. Packets are not
/// individual events: the flow is evaluated in closed form for each interval
/// during which a key is active (see CbrStream).
///
/// Start-up per session: routes reach the node, an optional phase offset
/// elapses, master and slave exchange one negotiation round trip over the
/// application channel, and the master requests its first bundle. The
/// master's flow starts when that bundle is acknowledged; a bidirectional
/// slave starts when the bundle reaches it.
class NetworkEncryptor : public EventHandler {
 public:
  NetworkEncryptor(Fabric& f, NodeId node);

  NodeId node() const { return node_; }
  void add_master_session(std::uint32_t s) { masters_.push_back(s); }

  void handle(const Event& ev) override;
  void on_routes();
  void on_app_message(MsgId msg);
  void on_app_dropped(MsgId msg);
  void on_bundle_acked(std::uint32_t session, std::uint32_t keys);
  void on_bundle_arrived(std::uint32_t session);
  void on_transport_failed(std::uint32_t session);
  /// Closes the books of the sessions this node masters at `end`.
  void finish(SimTime end);

 private:
  enum Tag : std::uint32_t { kStart, kExpire, kRetryRequest, kRetryNegotiate };

  void negotiate(Session& s);
  void activate(Session& s);
  void maybe_request(Session& s);
  void serve_active(Session& s, SimTime until);

  Fabric& f_;
  NodeId node_;
  HandlerId self_ = 0;
  RngStream retry_rng_;
  std::vector<std::uint32_t> masters_;
  bool started_ = false;
};

}  // namespace qkdn
