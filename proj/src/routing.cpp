#include "qkdn/routing.hpp"

#include <algorithm>
#include <deque>

#include <fmt/format.h>

#include "qkdn/errors.hpp"

namespace qkdn {

RouteTable::RouteTable(std::vector<NodeId> nodes, const std::vector<LinkSpec>& links)
    : nodes_(std::move(nodes)) {
  std::sort(nodes_.begin(), nodes_.end());
  const std::size_t n = nodes_.size();
  for (std::size_t i = 0; i < n; ++i) index_.emplace(nodes_[i], i);

  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& l : links) {
    const auto a = index_.find(l.a);
    const auto b = index_.find(l.b);
    if (a == index_.end() || b == index_.end()) continue;
    adj[a->second].push_back(b->second);
    adj[b->second].push_back(a->second);
  }
  // Index order equals id order, so sorted adjacency lists yield the
  // lowest-id next hop first.
  for (auto& v : adj) std::sort(v.begin(), v.end());

  dist_.assign(n, std::vector<int>(n, -1));
  for (std::size_t dst = 0; dst < n; ++dst) {
    std::deque<std::size_t> q{dst};
    dist_[dst][dst] = 0;
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop_front();
      for (std::size_t v : adj[u]) {
        if (dist_[v][dst] < 0) {
          dist_[v][dst] = dist_[u][dst] + 1;
          q.push_back(v);
        }
      }
    }
  }

  next_.assign(n, std::vector<NodeId>(n, -1));
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t d = 0; d < n; ++d) {
      if (u == d || dist_[u][d] < 0) continue;
      for (std::size_t v : adj[u]) {
        if (dist_[v][d] == dist_[u][d] - 1) {
          next_[u][d] = nodes_[v];
          break;
        }
      }
    }
  }

  routes_.assign(n, std::vector<std::vector<NodeId>>(n));
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t d = 0; d < n; ++d) {
      if (dist_[u][d] < 0) continue;
      auto& r = routes_[u][d];
      std::size_t cur = u;
      r.push_back(nodes_[cur]);
      while (cur != d) {
        cur = index_.at(next_[cur][d]);
        r.push_back(nodes_[cur]);
      }
    }
  }
}

std::size_t RouteTable::idx(NodeId n) const {
  const auto it = index_.find(n);
  if (it == index_.end()) throw ParameterError(fmt::format("node {} is not routed", n));
  return it->second;
}

std::optional<NodeId> RouteTable::next_hop(NodeId from, NodeId to) const {
  const NodeId h = next_[idx(from)][idx(to)];
  if (h < 0) return std::nullopt;
  return h;
}

int RouteTable::hops(NodeId from, NodeId to) const { return dist_[idx(from)][idx(to)]; }

const std::vector<NodeId>& RouteTable::route(NodeId from, NodeId to) const {
  return routes_[idx(from)][idx(to)];
}

RoutingTables RouteTable::tables() const {
  RoutingTables t;
  for (std::size_t u = 0; u < nodes_.size(); ++u) {
    auto& row = t[nodes_[u]];
    for (std::size_t d = 0; d < nodes_.size(); ++d) {
      if (next_[u][d] >= 0) row.emplace(nodes_[d], next_[u][d]);
    }
  }
  return t;
}

std::size_t RouteTable::unreachable_pairs() const {
  std::size_t c = 0;
  for (std::size_t u = 0; u < nodes_.size(); ++u) {
    for (std::size_t d = 0; d < nodes_.size(); ++d) c += u != d && dist_[u][d] < 0;
  }
  return c;
}

RouteTable compute_routes(const TopologySpec& topo) { return RouteTable(topo.km_nodes(), topo.links); }

}  // namespace qkdn
