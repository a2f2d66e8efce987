#pragma once

#include <optional>
#include <unordered_map>
#include <vector>

#include "qkdn/channel.hpp"
#include "qkdn/topology.hpp"

namespace qkdn {

/// Hop-count shortest paths over an undirected graph. Among equal-length
/// alternatives the next hop with the lowest id wins, which makes every
/// path a concatenation of next-hop choices and keeps routes stable.
class RouteTable {
 public:
  RouteTable() = default;
  RouteTable(std::vector<NodeId> nodes, const std::vector<LinkSpec>& links);

  const std::vector<NodeId>& nodes() const { return nodes_; }
  bool contains(NodeId n) const { return index_.count(n) != 0; }
  std::optional<NodeId> next_hop(NodeId from, NodeId to) const;
  /// Hop count, or -1 when `to` is unreachable.
  int hops(NodeId from, NodeId to) const;
  /// Full node sequence from..to, empty when unreachable. The reference
  /// stays valid for the lifetime of the table.
  const std::vector<NodeId>& route(NodeId from, NodeId to) const;
  /// Every (node, destination) pair with a route, in channel-table form.
  RoutingTables tables() const;
  /// Pairs of distinct nodes without a route.
  std::size_t unreachable_pairs() const;

 private:
  std::size_t idx(NodeId n) const;

  std::vector<NodeId> nodes_;
  std::unordered_map<NodeId, std::size_t> index_;
  std::vector<std::vector<int>> dist_;     // [from][to]
  std::vector<std::vector<NodeId>> next_;  // [from][to], -1 if none
  std::vector<std::vector<std::vector<NodeId>>> routes_;
};

/// Routes over the KM graph of `topo` (all nodes except the controller).
RouteTable compute_routes(const TopologySpec& topo);

}  // namespace qkdn
