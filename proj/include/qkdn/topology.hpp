#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qkdn/sim_time.hpp"
#include "qkdn/types.hpp"

namespace qkdn {

struct NodeSpec {
  NodeId id = 0;
  NodeKind kind = NodeKind::access;
  bool operator==(const NodeSpec&) const = default;
};

/// Undirected link. Endpoints are stored with a < b.
struct LinkSpec {
  NodeId a = 0;
  NodeId b = 0;
  double key_rate = 0.0;  ///< keys per second (QKD links only)
  SimTime delay = milliseconds(2);
  double loss_probability = 0.0;
  bool operator==(const LinkSpec&) const = default;
};

struct LinkDefaults {
  double key_rate = 100.0;
  SimTime delay = milliseconds(2);
  double loss_probability = 0.0;
};

/// Network graph. `links` form the QKD/KM graph (and the identical
/// application-layer graph); `management_links` is the separately-protected
/// star; `controller_links` attach the controller to the gateway KMS.
struct TopologySpec {
  std::vector<NodeSpec> nodes;
  std::vector<LinkSpec> links;
  std::vector<LinkSpec> management_links;
  std::vector<LinkSpec> controller_links;
  std::optional<std::uint64_t> generator_seed;

  bool operator==(const TopologySpec&) const = default;

  bool has_node(NodeId id) const;
  const NodeSpec& node(NodeId id) const;
  std::optional<NodeId> controller() const;
  std::optional<NodeId> gateway() const;
  /// Every node that runs a KMS (all but the controller), ascending.
  std::vector<NodeId> km_nodes() const;
  std::vector<NodeId> access_nodes() const;
  std::vector<NodeId> neighbors(NodeId id) const;
  std::size_t degree(NodeId id) const;
  std::optional<std::size_t> find_link(NodeId a, NodeId b) const;
  bool km_connected() const;
  NodeId next_free_id() const;

  /// Throws ParameterError on duplicate nodes/links, dangling endpoints,
  /// non-positive delays, loss outside [0,1], or a disconnected KM graph.
  void validate() const;
};

/// Scale-free graph by preferential attachment (m = 2 edges per new node,
/// seeded by a triangle). The highest-degree 9/20 of the nodes become
/// backbone nodes, ties broken by lower id; the rest are access nodes.
/// Node ids are 0..n-1. Throws ParameterError when n < 3.
TopologySpec generate_internet_like(int n, std::uint64_t seed, const LinkDefaults& defaults = {});

/// Path 1-2-3-6: two 58 keys/s free-space links and one 390 keys/s fibre.
TopologySpec padua_topology(const LinkDefaults& defaults = {});

/// Adds the controller. Separately-protected: a management link from the
/// controller to every node. CM-via-KMS: a gateway KMS joined to the KM graph
/// at `gateway_at` plus a controller link gateway<->controller.
/// Throws ParameterError if gateway_at is unknown or a controller exists.
TopologySpec attach_controller(TopologySpec topo, CmArchitecture arch, NodeId gateway_at);

std::string dump_topology(const TopologySpec& topo);
TopologySpec parse_topology(const std::string& text);
void save_topology(const TopologySpec& topo, const std::string& path);
TopologySpec load_topology(const std::string& path);

}  // namespace qkdn
