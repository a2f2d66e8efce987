#include "qkdn/topology.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <set>

#include <fmt/format.h>

#include "qkdn/errors.hpp"
#include "qkdn/io.hpp"
#include "qkdn/rng.hpp"
#include "yaml_util.hpp"

namespace qkdn {

namespace {

LinkSpec make_link(NodeId a, NodeId b, double rate, const LinkDefaults& d) {
  LinkSpec l;
  l.a = std::min(a, b);
  l.b = std::max(a, b);
  l.key_rate = rate;
  l.delay = d.delay;
  l.loss_probability = d.loss_probability;
  return l;
}

void check_links(const TopologySpec& t, const std::vector<LinkSpec>& links, const char* set) {
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const auto& l : links) {
    if (l.a == l.b) throw ParameterError(fmt::format("{}: self-loop at node {}", set, l.a));
    if (!t.has_node(l.a) || !t.has_node(l.b)) {
      throw ParameterError(fmt::format("{}: link {}-{} references an unknown node", set, l.a, l.b));
    }
    if (!seen.insert({std::min(l.a, l.b), std::max(l.a, l.b)}).second) {
      throw ParameterError(fmt::format("{}: duplicate link {}-{}", set, l.a, l.b));
    }
    if (l.delay <= SimTime::zero()) {
      throw ParameterError(fmt::format("{}: link {}-{} needs a positive delay", set, l.a, l.b));
    }
    if (!(l.loss_probability >= 0.0 && l.loss_probability <= 1.0)) {
      throw ParameterError(fmt::format("{}: link {}-{} loss outside [0,1]", set, l.a, l.b));
    }
    if (l.key_rate < 0.0) {
      throw ParameterError(fmt::format("{}: link {}-{} negative key rate", set, l.a, l.b));
    }
  }
}

}  // namespace

bool TopologySpec::has_node(NodeId id) const {
  return std::any_of(nodes.begin(), nodes.end(), [id](const NodeSpec& n) { return n.id == id; });
}

const NodeSpec& TopologySpec::node(NodeId id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return n;
  }
  throw ParameterError(fmt::format("unknown node {}", id));
}

std::optional<NodeId> TopologySpec::controller() const {
  for (const auto& n : nodes) {
    if (n.kind == NodeKind::controller) return n.id;
  }
  return std::nullopt;
}

std::optional<NodeId> TopologySpec::gateway() const {
  for (const auto& n : nodes) {
    if (n.kind == NodeKind::gateway) return n.id;
  }
  return std::nullopt;
}

std::vector<NodeId> TopologySpec::km_nodes() const {
  std::vector<NodeId> out;
  for (const auto& n : nodes) {
    if (n.kind != NodeKind::controller) out.push_back(n.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NodeId> TopologySpec::access_nodes() const {
  std::vector<NodeId> out;
  for (const auto& n : nodes) {
    if (n.kind == NodeKind::access) out.push_back(n.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NodeId> TopologySpec::neighbors(NodeId id) const {
  std::vector<NodeId> out;
  for (const auto& l : links) {
    if (l.a == id) out.push_back(l.b);
    if (l.b == id) out.push_back(l.a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t TopologySpec::degree(NodeId id) const { return neighbors(id).size(); }

std::optional<std::size_t> TopologySpec::find_link(NodeId a, NodeId b) const {
  const NodeId lo = std::min(a, b);
  const NodeId hi = std::max(a, b);
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (links[i].a == lo && links[i].b == hi) return i;
  }
  return std::nullopt;
}

bool TopologySpec::km_connected() const {
  const auto km = km_nodes();
  if (km.empty()) return true;
  std::set<NodeId> seen{km.front()};
  std::queue<NodeId> q;
  q.push(km.front());
  while (!q.empty()) {
    const NodeId u = q.front();
    q.pop();
    for (NodeId v : neighbors(u)) {
      if (seen.insert(v).second) q.push(v);
    }
  }
  return seen.size() == km.size();
}

NodeId TopologySpec::next_free_id() const {
  NodeId m = -1;
  for (const auto& n : nodes) m = std::max(m, n.id);
  return m + 1;
}

void TopologySpec::validate() const {
  std::set<NodeId> ids;
  int controllers = 0;
  int gateways = 0;
  for (const auto& n : nodes) {
    if (!ids.insert(n.id).second) throw ParameterError(fmt::format("duplicate node {}", n.id));
    controllers += n.kind == NodeKind::controller;
    gateways += n.kind == NodeKind::gateway;
  }
  if (controllers > 1) throw ParameterError("more than one controller node");
  if (gateways > 1) throw ParameterError("more than one gateway node");
  check_links(*this, links, "links");
  check_links(*this, management_links, "management_links");
  check_links(*this, controller_links, "controller_links");
  if (auto c = controller()) {
    for (const auto& l : links) {
      if (l.a == *c || l.b == *c) throw ParameterError("controller cannot hold a QKD link");
    }
  }
  if (!km_connected()) throw ParameterError("KM graph is not connected");
}

TopologySpec generate_internet_like(int n, std::uint64_t seed, const LinkDefaults& defaults) {
  if (n < 3) throw ParameterError("generate_internet_like: need at least 3 nodes");
  constexpr int kEdgesPerNode = 2;
  RngStream rng(seed, "topology");

  TopologySpec t;
  t.generator_seed = seed;
  // Each edge contributes both endpoints; sampling an entry uniformly is
  // sampling a node proportionally to its degree.
  std::vector<NodeId> endpoints;
  auto add_edge = [&](NodeId a, NodeId b) {
    t.links.push_back(make_link(a, b, defaults.key_rate, defaults));
    endpoints.push_back(a);
    endpoints.push_back(b);
  };
  add_edge(0, 1);
  add_edge(0, 2);
  add_edge(1, 2);
  for (NodeId v = 3; v < n; ++v) {
    std::vector<NodeId> targets;
    while (static_cast<int>(targets.size()) < kEdgesPerNode) {
      const NodeId u = endpoints[rng.index(endpoints.size())];
      if (std::find(targets.begin(), targets.end(), u) == targets.end()) targets.push_back(u);
    }
    std::sort(targets.begin(), targets.end());
    for (NodeId u : targets) add_edge(u, v);
  }

  std::vector<NodeId> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::size_t> deg(static_cast<std::size_t>(n), 0);
  for (NodeId e : endpoints) ++deg[static_cast<std::size_t>(e)];
  std::stable_sort(order.begin(), order.end(), [&](NodeId x, NodeId y) {
    return deg[static_cast<std::size_t>(x)] > deg[static_cast<std::size_t>(y)];
  });
  const int backbone = n * 9 / 20;
  std::vector<NodeKind> kinds(static_cast<std::size_t>(n), NodeKind::access);
  for (int i = 0; i < backbone; ++i) kinds[static_cast<std::size_t>(order[i])] = NodeKind::backbone;
  for (NodeId v = 0; v < n; ++v) t.nodes.push_back({v, kinds[static_cast<std::size_t>(v)]});
  return t;
}

TopologySpec padua_topology(const LinkDefaults& d) {
  TopologySpec t;
  t.nodes = {{1, NodeKind::access}, {2, NodeKind::backbone}, {3, NodeKind::backbone},
             {6, NodeKind::access}};
  t.links = {make_link(1, 2, 58.0, d), make_link(2, 3, 58.0, d), make_link(3, 6, 390.0, d)};
  return t;
}

TopologySpec attach_controller(TopologySpec topo, CmArchitecture arch, NodeId gateway_at) {
  if (topo.controller()) throw ParameterError("attach_controller: controller already attached");
  if (!topo.has_node(gateway_at)) {
    throw ParameterError(fmt::format("attach_controller: unknown node {}", gateway_at));
  }
  const NodeId controller = topo.next_free_id();
  const auto km = topo.km_nodes();
  LinkDefaults d;
  d.delay = topo.links.empty() ? milliseconds(2) : topo.links.front().delay;
  if (arch == CmArchitecture::separately_protected) {
    topo.nodes.push_back({controller, NodeKind::controller});
    for (NodeId v : km) topo.management_links.push_back(make_link(v, controller, 0.0, d));
  } else {
    const NodeId gw = controller + 1;
    double rate = 0.0;
    for (const auto& l : topo.links) {
      if (l.a == gateway_at || l.b == gateway_at) rate = std::max(rate, l.key_rate);
    }
    topo.nodes.push_back({controller, NodeKind::controller});
    topo.nodes.push_back({gw, NodeKind::gateway});
    topo.links.push_back(make_link(gateway_at, gw, rate, d));
    topo.controller_links.push_back(make_link(gw, controller, 0.0, d));
  }
  return topo;
}

namespace {

void dump_links(std::string& out, const char* name, const std::vector<LinkSpec>& links) {
  if (links.empty()) {
    out += fmt::format("{}: []\n", name);
    return;
  }
  out += fmt::format("{}:\n", name);
  for (const auto& l : links) {
    out += fmt::format("  - {{a: {}, b: {}, key_rate: {}, delay_ns: {}, loss: {}}}\n", l.a, l.b,
                       format_double(l.key_rate), l.delay.ns(), format_double(l.loss_probability));
  }
}

std::vector<LinkSpec> parse_links(const YAML::Node& root, const char* name) {
  std::vector<LinkSpec> out;
  const YAML::Node seq = root[name];
  if (!seq || seq.IsNull()) return out;
  yaml::expect_sequence(seq, name);
  for (const auto& item : seq) {
    yaml::expect_map(item, name);
    yaml::reject_unknown(item, {"a", "b", "key_rate", "delay_ns", "delay_ms", "loss"}, name);
    LinkSpec l;
    const NodeId a = yaml::require<int>(item, "a");
    const NodeId b = yaml::require<int>(item, "b");
    l.a = std::min(a, b);
    l.b = std::max(a, b);
    l.key_rate = yaml::get<double>(item, "key_rate", 0.0);
    if (item["delay_ns"]) {
      l.delay = SimTime{yaml::require<std::int64_t>(item, "delay_ns")};
    } else {
      l.delay = SimTime::from_ms(yaml::get<double>(item, "delay_ms", 2.0));
    }
    l.loss_probability = yaml::get<double>(item, "loss", 0.0);
    out.push_back(l);
  }
  return out;
}

}  // namespace

std::string dump_topology(const TopologySpec& topo) {
  std::string out;
  if (topo.generator_seed) out += fmt::format("generator_seed: {}\n", *topo.generator_seed);
  out += "nodes:\n";
  for (const auto& n : topo.nodes) {
    out += fmt::format("  - {{id: {}, kind: {}}}\n", n.id, to_string(n.kind));
  }
  dump_links(out, "links", topo.links);
  dump_links(out, "management_links", topo.management_links);
  dump_links(out, "controller_links", topo.controller_links);
  return out;
}

TopologySpec parse_topology(const std::string& text) {
  const YAML::Node root = yaml::parse_text(text);
  yaml::expect_map(root, "topology");
  yaml::reject_unknown(root, {"generator_seed", "nodes", "links", "management_links",
                              "controller_links"},
                       "topology");
  TopologySpec t;
  if (root["generator_seed"]) t.generator_seed = yaml::require<std::uint64_t>(root, "generator_seed");
  const YAML::Node nodes = root["nodes"];
  if (!nodes) throw ConfigError("missing field 'nodes'", yaml::line_of(root));
  yaml::expect_sequence(nodes, "nodes");
  for (const auto& item : nodes) {
    yaml::expect_map(item, "node");
    yaml::reject_unknown(item, {"id", "kind"}, "node");
    NodeSpec n;
    n.id = yaml::require<int>(item, "id");
    const auto kind = yaml::get<std::string>(item, "kind", "access");
    const auto parsed = parse_node_kind(kind);
    if (!parsed) throw ConfigError("unknown node kind '" + kind + "'", yaml::line_of(item["kind"]));
    n.kind = *parsed;
    t.nodes.push_back(n);
  }
  t.links = parse_links(root, "links");
  t.management_links = parse_links(root, "management_links");
  t.controller_links = parse_links(root, "controller_links");
  try {
    t.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(e.what(), yaml::line_of(root));
  }
  return t;
}

void save_topology(const TopologySpec& topo, const std::string& path) {
  write_file_atomic(path, dump_topology(topo));
}

TopologySpec load_topology(const std::string& path) { return parse_topology(read_file(path)); }

}  // namespace qkdn
