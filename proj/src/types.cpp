#include "qkdn/types.hpp"

namespace qkdn {

std::string_view to_string(NodeKind k) {
  switch (k) {
    case NodeKind::access: return "access";
    case NodeKind::backbone: return "backbone";
    case NodeKind::controller: return "controller";
    case NodeKind::gateway: return "gateway";
  }
  return "?";
}

std::string_view to_string(CmArchitecture a) {
  return a == CmArchitecture::separately_protected ? "separately_protected" : "cm_via_kms";
}

std::string_view to_string(RoutingKind r) {
  return r == RoutingKind::source_reactive ? "source_reactive" : "distributed_proactive";
}

std::optional<NodeKind> parse_node_kind(std::string_view s) {
  if (s == "access") return NodeKind::access;
  if (s == "backbone") return NodeKind::backbone;
  if (s == "controller") return NodeKind::controller;
  if (s == "gateway") return NodeKind::gateway;
  return std::nullopt;
}

std::optional<CmArchitecture> parse_architecture(std::string_view s) {
  if (s == "separately_protected" || s == "sp") return CmArchitecture::separately_protected;
  if (s == "cm_via_kms") return CmArchitecture::cm_via_kms;
  return std::nullopt;
}

std::optional<RoutingKind> parse_routing(std::string_view s) {
  if (s == "source_reactive" || s == "reactive") return RoutingKind::source_reactive;
  if (s == "distributed_proactive" || s == "proactive") return RoutingKind::distributed_proactive;
  return std::nullopt;
}

}  // namespace qkdn
