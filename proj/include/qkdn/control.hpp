#pragma once

#include <cstdint>
#include <vector>

#include "qkdn/fabric.hpp"
#include "qkdn/kernel.hpp"

namespace qkdn {

/// Central SDN controller. It collects setup messages, distributes routing
/// state once every KM node is ready, answers routing-vector requests
/// (reactive) or re-pushes the static tables every update period
/// (proactive), and logs every CM message. It adds no processing delay.
class Controller : public EventHandler {
 public:
  Controller(Fabric& f, NodeId id);

  void handle(const Event& ev) override;
  void on_message(MsgId msg);

  bool distributed() const { return distributed_; }
  std::size_t ready_nodes() const { return ready_count_; }
  std::uint64_t pushes() const { return pushes_; }
  std::uint64_t vector_replies() const { return vector_replies_; }
  std::uint64_t link_status_received() const { return link_status_; }

 private:
  enum Tag : std::uint32_t { kPush };

  /// Sends a CM message to `dst` over the architecture's CM path.
  void send(MsgId msg);
  void distribute();
  void push_all(MsgKind kind);

  Fabric& f_;
  NodeId id_;
  HandlerId self_ = 0;
  std::vector<NodeId> km_nodes_;
  std::vector<bool> ready_;
  std::size_t ready_count_ = 0;
  bool distributed_ = false;
  std::uint64_t pushes_ = 0;
  std::uint64_t vector_replies_ = 0;
  std::uint64_t link_status_ = 0;
};

}  // namespace qkdn
