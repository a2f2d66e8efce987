#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <map>

#include "qkdn/errors.hpp"
#include "qkdn/routing.hpp"
#include "qkdn/topology.hpp"

using namespace qkdn;

namespace {

/// Floyd-Warshall hop counts; -1 for unreachable.
std::map<std::pair<NodeId, NodeId>, int> all_pairs_hops(const std::vector<NodeId>& nodes,
                                                        const std::vector<LinkSpec>& links) {
  const int inf = 1 << 20;
  std::map<std::pair<NodeId, NodeId>, int> d;
  for (NodeId a : nodes) {
    for (NodeId b : nodes) d[{a, b}] = a == b ? 0 : inf;
  }
  for (const auto& l : links) d[{l.a, l.b}] = d[{l.b, l.a}] = 1;
  for (NodeId k : nodes) {
    for (NodeId i : nodes) {
      for (NodeId j : nodes) d[{i, j}] = std::min(d[{i, j}], d[{i, k}] + d[{k, j}]);
    }
  }
  for (auto& [k, v] : d) {
    if (v >= inf) v = -1;
  }
  return d;
}

}  // namespace

TEST_CASE("20-node generator: connected, 11 access + 9 backbone, heavy tail") {
  const auto t = generate_internet_like(20, 42);
  CHECK(t.nodes.size() == 20);
  CHECK(t.links.size() == 3 + 2 * 17);
  CHECK(t.km_connected());
  CHECK(t.access_nodes().size() == 11);
  std::size_t max_degree = 0;
  for (const auto& n : t.nodes) max_degree = std::max(max_degree, t.degree(n.id));
  CHECK(max_degree >= 4);
  // Backbone = the nine highest degrees, ties to the lower id.
  std::vector<NodeId> ids;
  for (const auto& n : t.nodes) ids.push_back(n.id);
  std::stable_sort(ids.begin(), ids.end(),
                   [&](NodeId a, NodeId b) { return t.degree(a) > t.degree(b); });
  for (std::size_t i = 0; i < ids.size(); ++i) {
    CHECK((t.node(ids[i]).kind == NodeKind::backbone) == (i < 9));
  }
  for (const auto& l : t.links) {
    CHECK(l.a < l.b);
    CHECK(l.delay == milliseconds(2));
    CHECK(l.loss_probability == 0.0);
  }
}

TEST_CASE("generator is deterministic and rejects n < 3") {
  CHECK(generate_internet_like(20, 7) == generate_internet_like(20, 7));
  CHECK(!(generate_internet_like(20, 7).links == generate_internet_like(20, 8).links));
  const auto tiny = generate_internet_like(3, 99);
  CHECK(tiny.nodes.size() == 3);
  CHECK(tiny.km_connected());
  CHECK_THROWS_AS(generate_internet_like(2, 1), ParameterError);
}

TEST_CASE("property: generated graphs are connected for many seeds and sizes") {
  for (int n : {3, 5, 10, 20, 50}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto t = generate_internet_like(n, seed);
      CHECK(t.km_connected());
      CHECK_NOTHROW(t.validate());
    }
  }
}

TEST_CASE("Padua path") {
  const auto t = padua_topology();
  CHECK(t.nodes.size() == 4);
  REQUIRE(t.find_link(1, 2));
  REQUIRE(t.find_link(3, 2));
  REQUIRE(t.find_link(6, 3));
  CHECK(t.links[*t.find_link(1, 2)].key_rate == 58);
  CHECK(t.links[*t.find_link(2, 3)].key_rate == 58);
  CHECK(t.links[*t.find_link(3, 6)].key_rate == 390);
}

TEST_CASE("attach_controller: separately protected star") {
  const auto base = generate_internet_like(20, 42);
  const auto t = attach_controller(base, CmArchitecture::separately_protected, 19);
  CHECK(t.management_links.size() == 20);
  CHECK(t.links == base.links);
  CHECK(t.controller_links.empty());
  REQUIRE(t.controller());
  CHECK(!t.gateway());
  const auto r = RouteTable(t.km_nodes(), t.links);
  CHECK(r.unreachable_pairs() == 0);
}

TEST_CASE("attach_controller: CM-via-KMS gateway") {
  const auto base = generate_internet_like(20, 42);
  const auto t = attach_controller(base, CmArchitecture::cm_via_kms, 19);
  CHECK(t.km_nodes().size() == 21);
  CHECK(t.links.size() >= base.links.size() + 1);
  CHECK(t.management_links.empty());
  CHECK(t.controller_links.size() == 1);
  REQUIRE(t.gateway());
  CHECK(t.find_link(*t.gateway(), 19));
  CHECK(t.km_connected());

  const auto p = attach_controller(padua_topology(), CmArchitecture::cm_via_kms, 1);
  CHECK(p.km_nodes().size() == 5);
}

TEST_CASE("attach_controller rejects a second controller and unknown nodes") {
  const auto t = attach_controller(padua_topology(), CmArchitecture::separately_protected, 1);
  CHECK_THROWS_AS(attach_controller(t, CmArchitecture::separately_protected, 1), ParameterError);
  CHECK_THROWS_AS(attach_controller(padua_topology(), CmArchitecture::cm_via_kms, 42),
                  ParameterError);
}

TEST_CASE("topology text round trip") {
  for (auto arch : {CmArchitecture::separately_protected, CmArchitecture::cm_via_kms}) {
    const auto t = attach_controller(generate_internet_like(12, 3), arch, 11);
    CHECK(parse_topology(dump_topology(t)) == t);
  }
  const auto dir = std::filesystem::temp_directory_path() / "qkdn-topo-test";
  const auto path = (dir / "t.yaml").string();
  save_topology(padua_topology(), path);
  CHECK(load_topology(path) == padua_topology());
  std::filesystem::remove_all(dir);
}

TEST_CASE("topology parse errors carry a line") {
  const std::string text =
      "nodes:\n"
      "  - {id: 0, kind: access}\n"
      "  - {id: 1, kind: teapot}\n"
      "links: []\n";
  try {
    parse_topology(text);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_topology("nodes:\n  - {id: 0, kind: access}\n  - {id: 1, kind: access}\nlinks: []\n"),
                  ConfigError);
}

TEST_CASE("route table agrees with a Floyd-Warshall oracle") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto t = attach_controller(generate_internet_like(20, seed), CmArchitecture::cm_via_kms, 19);
    const auto nodes = t.km_nodes();
    const RouteTable r(nodes, t.links);
    const auto oracle = all_pairs_hops(nodes, t.links);
    for (NodeId a : nodes) {
      for (NodeId b : nodes) {
        CHECK(r.hops(a, b) == oracle.at({a, b}));
        if (a == b) continue;
        // Lowest-id neighbour one hop closer.
        NodeId best = -1;
        for (NodeId n : t.neighbors(a)) {
          if (oracle.at({n, b}) == oracle.at({a, b}) - 1 && (best < 0 || n < best)) best = n;
        }
        CHECK(r.next_hop(a, b) == best);
        const auto& path = r.route(a, b);
        REQUIRE(path.size() == static_cast<std::size_t>(oracle.at({a, b}) + 1));
        CHECK(path.front() == a);
        CHECK(path.back() == b);
        for (std::size_t i = 1; i < path.size(); ++i) CHECK(t.find_link(path[i - 1], path[i]));
      }
    }
  }
}

TEST_CASE("Padua routes and the SP star") {
  const auto t = padua_topology();
  const auto r = compute_routes(t);
  CHECK(r.route(1, 6) == std::vector<NodeId>{1, 2, 3, 6});
  CHECK(r.next_hop(2, 6) == 3);
  const auto sp = attach_controller(t, CmArchitecture::separately_protected, 1);
  const RouteTable star(std::vector<NodeId>{1, 2, 3, 6, *sp.controller()}, sp.management_links);
  for (NodeId n : {1, 2, 3, 6}) {
    CHECK(star.next_hop(n, *sp.controller()) == *sp.controller());
    CHECK(star.hops(n, *sp.controller()) == 1);
  }
}
