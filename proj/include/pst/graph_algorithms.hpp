#pragma once

#include <limits>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include "pst/errors.hpp"
#include "pst/graph.hpp"

namespace pst {

inline constexpr double kInfiniteDistance = std::numeric_limits<double>::infinity();

/// Distances and predecessors from a multi-source Dijkstra run.
/// parent/parent_edge are 0/-1 for sources and unreachable vertices.
struct ShortestPathTree {
  std::vector<double> distance;     // [0] unused
  std::vector<VertexId> parent;     // predecessor vertex on one shortest path
  std::vector<EdgeId> parent_edge;  // edge to the predecessor

  bool reachable(VertexId v) const { return distance[static_cast<std::size_t>(v)] < kInfiniteDistance; }

  /// Edge ids of the path from v back to the nearest source.
  std::vector<EdgeId> path_edges(VertexId v) const {
    std::vector<EdgeId> out;
    while (parent[static_cast<std::size_t>(v)] != 0) {
      out.push_back(parent_edge[static_cast<std::size_t>(v)]);
      v = parent[static_cast<std::size_t>(v)];
    }
    return out;
  }

  /// Vertices strictly between v and the nearest source on the tree path.
  std::vector<VertexId> path_interior(VertexId v) const {
    std::vector<VertexId> out;
    VertexId p = parent[static_cast<std::size_t>(v)];
    while (p != 0 && parent[static_cast<std::size_t>(p)] != 0) {
      out.push_back(p);
      p = parent[static_cast<std::size_t>(p)];
    }
    return out;
  }
};

/// Multi-source Dijkstra over the whole graph, or over the live subgraph
/// when a mask is supplied. Ties resolve toward the smaller vertex id.
inline ShortestPathTree shortest_paths(const Graph& g, std::span<const VertexId> sources,
                                       const EdgeMask* live = nullptr) {
  if (sources.empty()) throw std::invalid_argument("shortest_paths: empty source set");
  const std::size_t n = static_cast<std::size_t>(g.vertex_count()) + 1;
  ShortestPathTree t;
  t.distance.assign(n, kInfiniteDistance);
  t.parent.assign(n, 0);
  t.parent_edge.assign(n, -1);

  using Item = std::pair<double, VertexId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (VertexId s : sources) {
    if (s < 1 || s >= static_cast<VertexId>(n))
      throw std::invalid_argument("shortest_paths: source out of range");
    t.distance[static_cast<std::size_t>(s)] = 0.0;
    heap.emplace(0.0, s);
  }
  while (!heap.empty()) {
    auto [d, v] = heap.top();
    heap.pop();
    if (d > t.distance[static_cast<std::size_t>(v)]) continue;
    for (const Neighbor& nb : g.neighbors(v)) {
      if (live && !(*live)[static_cast<std::size_t>(nb.edge)]) continue;
      double nd = d + g.edge(nb.edge).length;
      if (nd < t.distance[static_cast<std::size_t>(nb.to)]) {
        t.distance[static_cast<std::size_t>(nb.to)] = nd;
        t.parent[static_cast<std::size_t>(nb.to)] = v;
        t.parent_edge[static_cast<std::size_t>(nb.to)] = nb.edge;
        heap.emplace(nd, nb.to);
      }
    }
  }
  return t;
}

inline ShortestPathTree shortest_paths(const Graph& g, std::initializer_list<VertexId> sources) {
  return shortest_paths(g, std::span<const VertexId>(sources.begin(), sources.size()));
}

namespace detail {

class UnionFind {
public:
  explicit UnionFind(std::size_t n) : parent_(n) {
    for (std::size_t i = 0; i < n; ++i) parent_[i] = static_cast<int>(i);
  }
  int find(int v) {
    while (parent_[static_cast<std::size_t>(v)] != v) {
      parent_[static_cast<std::size_t>(v)] = parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(v)])];
      v = parent_[static_cast<std::size_t>(v)];
    }
    return v;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[static_cast<std::size_t>(b)] = a;
    return true;
  }

private:
  std::vector<int> parent_;
};

// Kruskal over the given candidate edges; `required` is the vertex set that
// must end up in one component.
inline std::vector<EdgeId> kruskal(const Graph& g, std::vector<EdgeId> candidates,
                                   const std::vector<VertexId>& required) {
  std::sort(candidates.begin(), candidates.end(), [&](EdgeId a, EdgeId b) {
    const Edge& ea = g.edge(a);
    const Edge& eb = g.edge(b);
    if (ea.length != eb.length) return ea.length < eb.length;
    if (ea.u != eb.u) return ea.u < eb.u;
    return ea.v < eb.v;
  });
  UnionFind uf(static_cast<std::size_t>(g.vertex_count()) + 1);
  std::vector<EdgeId> tree;
  for (EdgeId id : candidates) {
    const Edge& e = g.edge(id);
    if (uf.unite(e.u, e.v)) tree.push_back(id);
  }
  if (!required.empty()) {
    int root = uf.find(required.front());
    for (VertexId v : required)
      if (uf.find(v) != root)
        throw InfeasibleError("subgraph is disconnected: vertex " + std::to_string(v) +
                              " unreachable from vertex " + std::to_string(required.front()));
  }
  std::sort(tree.begin(), tree.end());
  return tree;
}

}  // namespace detail

/// Minimum spanning tree of the subgraph induced by `vertex_subset`.
/// Ties break by (length, u, v); throws InfeasibleError when the induced
/// subgraph is disconnected.
inline std::vector<EdgeId> minimum_spanning_tree(const Graph& g,
                                                 std::span<const VertexId> vertex_subset) {
  std::vector<std::uint8_t> in(static_cast<std::size_t>(g.vertex_count()) + 1, 0);
  std::vector<VertexId> required;
  for (VertexId v : vertex_subset) {
    if (v < 1 || v > g.vertex_count())
      throw std::invalid_argument("minimum_spanning_tree: vertex out of range");
    if (!in[static_cast<std::size_t>(v)]) required.push_back(v);
    in[static_cast<std::size_t>(v)] = 1;
  }
  std::vector<EdgeId> candidates;
  for (EdgeId id = 0; id < g.edge_count(); ++id) {
    const Edge& e = g.edge(id);
    if (in[static_cast<std::size_t>(e.u)] && in[static_cast<std::size_t>(e.v)]) candidates.push_back(id);
  }
  return detail::kruskal(g, std::move(candidates), required);
}

inline std::vector<EdgeId> minimum_spanning_tree(const Graph& g,
                                                 std::initializer_list<VertexId> vs) {
  return minimum_spanning_tree(g, std::span<const VertexId>(vs.begin(), vs.size()));
}

/// Minimum spanning tree of the subgraph formed by the given edges
/// (vertices = their endpoints). Used to reduce a saved network to a tree.
inline std::vector<EdgeId> mst_of_edge_subgraph(const Graph& g, const std::vector<EdgeId>& edge_ids) {
  std::vector<std::uint8_t> in(static_cast<std::size_t>(g.vertex_count()) + 1, 0);
  std::vector<VertexId> vertices;
  for (EdgeId id : edge_ids) {
    const Edge& e = g.edge(id);
    for (VertexId v : {e.u, e.v}) {
      if (!in[static_cast<std::size_t>(v)]) {
        in[static_cast<std::size_t>(v)] = 1;
        vertices.push_back(v);
      }
    }
  }
  return detail::kruskal(g, edge_ids, vertices);
}

/// Partition of all vertices into maximal sets connected by live edges.
/// Labels are dense, 0-based, assigned in ascending order of each
/// component's smallest vertex.
struct Components {
  std::vector<int> label;  // [0] unused, -1 sentinel
  int count = 0;

  std::vector<std::vector<VertexId>> vertex_sets() const {
    std::vector<std::vector<VertexId>> out(static_cast<std::size_t>(count));
    for (VertexId v = 1; v < static_cast<VertexId>(label.size()); ++v)
      out[static_cast<std::size_t>(label[static_cast<std::size_t>(v)])].push_back(v);
    return out;
  }
};

inline Components connected_components(const Graph& g, const EdgeMask& live) {
  Components c;
  c.label.assign(static_cast<std::size_t>(g.vertex_count()) + 1, -1);
  std::vector<VertexId> stack;
  for (VertexId start = 1; start <= g.vertex_count(); ++start) {
    if (c.label[static_cast<std::size_t>(start)] != -1) continue;
    c.label[static_cast<std::size_t>(start)] = c.count;
    stack.push_back(start);
    while (!stack.empty()) {
      VertexId v = stack.back();
      stack.pop_back();
      for (const Neighbor& nb : g.neighbors(v)) {
        if (!live[static_cast<std::size_t>(nb.edge)]) continue;
        if (c.label[static_cast<std::size_t>(nb.to)] == -1) {
          c.label[static_cast<std::size_t>(nb.to)] = c.count;
          stack.push_back(nb.to);
        }
      }
    }
    ++c.count;
  }
  return c;
}

/// Drop every live edge whose component contains no terminal.
inline EdgeMask prune_disconnected_edges(const Graph& g, const EdgeMask& live,
                                         std::span<const VertexId> terminals) {
  Components c = connected_components(g, live);
  std::vector<std::uint8_t> keep(static_cast<std::size_t>(c.count), 0);
  for (VertexId t : terminals) keep[static_cast<std::size_t>(c.label[static_cast<std::size_t>(t)])] = 1;
  EdgeMask out = live;
  for (EdgeId id = 0; id < g.edge_count(); ++id) {
    if (!out[static_cast<std::size_t>(id)]) continue;
    const Edge& e = g.edge(id);
    if (!keep[static_cast<std::size_t>(c.label[static_cast<std::size_t>(e.u)])])
      out[static_cast<std::size_t>(id)] = 0;
  }
  return out;
}

}  // namespace pst
