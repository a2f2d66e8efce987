#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace qkdn {

using NodeId = int;
using LinkIndex = std::uint32_t;

enum class NodeKind { access, backbone, controller, gateway };

/// How control-and-management traffic reaches the controller.
enum class CmArchitecture {
  separately_protected,  ///< dedicated management star, no QKD keys
  cm_via_kms,            ///< relayed through the KM layer like key transports
};

enum class RoutingKind {
  source_reactive,        ///< per-request routing vector from the controller
  distributed_proactive,  ///< periodically pushed next-hop tables
};

std::string_view to_string(NodeKind k);
std::string_view to_string(CmArchitecture a);
std::string_view to_string(RoutingKind r);
std::optional<NodeKind> parse_node_kind(std::string_view s);
std::optional<CmArchitecture> parse_architecture(std::string_view s);
std::optional<RoutingKind> parse_routing(std::string_view s);

}  // namespace qkdn
