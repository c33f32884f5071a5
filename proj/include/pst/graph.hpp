#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pst {

/// Vertex ids are 1-based and contiguous, following the SteinLib convention.
using VertexId = std::int32_t;
/// Index into Graph::edges().
using EdgeId = std::int32_t;
/// Dense per-edge membership flags, indexed by EdgeId.
using EdgeMask = std::vector<std::uint8_t>;

struct Edge {
  VertexId u = 0;  // u < v after canonicalization
  VertexId v = 0;
  double length = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Neighbor {
  VertexId to = 0;
  EdgeId edge = 0;
};

/// Undirected simple graph with positive edge lengths.
///
/// Edges are canonicalized to u < v and sorted by (u, v) at construction,
/// so EdgeIds are stable and reports are reproducible. The constructor
/// rejects self-loops, non-positive lengths, out-of-range endpoints and
/// duplicate vertex pairs; file loaders collapse parallel edges before
/// constructing a Graph.
class Graph {
public:
  Graph() = default;

  Graph(int vertex_count, std::vector<Edge> edges) : vertex_count_(vertex_count) {
    if (vertex_count < 1) throw std::invalid_argument("graph needs at least one vertex");
    for (Edge& e : edges) {
      if (e.u == e.v)
        throw std::invalid_argument("self-loop at vertex " + std::to_string(e.u));
      if (e.u < 1 || e.u > vertex_count || e.v < 1 || e.v > vertex_count)
        throw std::invalid_argument("edge endpoint out of range: (" + std::to_string(e.u) +
                                    "," + std::to_string(e.v) + ")");
      if (!(e.length > 0.0))
        throw std::invalid_argument("non-positive length on edge (" + std::to_string(e.u) +
                                    "," + std::to_string(e.v) + ")");
      if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges.begin(), edges.end(),
              [](const Edge& a, const Edge& b) { return a.u != b.u ? a.u < b.u : a.v < b.v; });
    for (std::size_t i = 1; i < edges.size(); ++i)
      if (edges[i].u == edges[i - 1].u && edges[i].v == edges[i - 1].v)
        throw std::invalid_argument("duplicate edge (" + std::to_string(edges[i].u) + "," +
                                    std::to_string(edges[i].v) + ")");
    edges_ = std::move(edges);
    build_adjacency();
  }

  int vertex_count() const { return vertex_count_; }
  const std::vector<Edge>& edges() const { return edges_; }
  EdgeId edge_count() const { return static_cast<EdgeId>(edges_.size()); }
  const Edge& edge(EdgeId e) const { return edges_[static_cast<std::size_t>(e)]; }

  std::span<const Neighbor> neighbors(VertexId v) const {
    return {adjacency_.data() + offsets_[static_cast<std::size_t>(v)],
            adjacency_.data() + offsets_[static_cast<std::size_t>(v) + 1]};
  }

  double total_length() const {
    double s = 0.0;
    for (const Edge& e : edges_) s += e.length;
    return s;
  }

  /// Mask with every edge live.
  EdgeMask full_mask() const { return EdgeMask(edges_.size(), 1); }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.vertex_count_ == b.vertex_count_ && a.edges_ == b.edges_;
  }

private:
  void build_adjacency() {
    offsets_.assign(static_cast<std::size_t>(vertex_count_) + 2, 0);
    for (const Edge& e : edges_) {
      ++offsets_[static_cast<std::size_t>(e.u) + 1];
      ++offsets_[static_cast<std::size_t>(e.v) + 1];
    }
    for (std::size_t i = 1; i < offsets_.size(); ++i) offsets_[i] += offsets_[i - 1];
    adjacency_.resize(2 * edges_.size());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (EdgeId id = 0; id < edge_count(); ++id) {
      const Edge& e = edges_[static_cast<std::size_t>(id)];
      adjacency_[fill[static_cast<std::size_t>(e.u)]++] = {e.v, id};
      adjacency_[fill[static_cast<std::size_t>(e.v)]++] = {e.u, id};
    }
  }

  int vertex_count_ = 1;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> adjacency_;
};

/// A Steiner problem: graph, terminal set, optional known optimum.
/// The graph must be connected; terminals must be vertices of the graph.
class Instance {
public:
  Instance() = default;

  Instance(Graph graph, std::vector<VertexId> terminals,
           std::optional<double> known_optimum = std::nullopt, std::string name = {})
      : graph_(std::move(graph)),
        terminals_(std::move(terminals)),
        known_optimum_(known_optimum),
        name_(std::move(name)) {
    if (terminals_.empty()) throw std::invalid_argument("terminal set is empty");
    std::sort(terminals_.begin(), terminals_.end());
    terminals_.erase(std::unique(terminals_.begin(), terminals_.end()), terminals_.end());
    for (VertexId t : terminals_)
      if (t < 1 || t > graph_.vertex_count())
        throw std::invalid_argument("terminal " + std::to_string(t) + " is not a vertex");
    if (known_optimum_ && !(*known_optimum_ > 0.0))
      throw std::invalid_argument("known optimum must be positive");
    if (!connected())
      throw std::invalid_argument("graph is disconnected");
  }

  const Graph& graph() const { return graph_; }
  const std::vector<VertexId>& terminals() const { return terminals_; }
  int terminal_count() const { return static_cast<int>(terminals_.size()); }
  const std::optional<double>& known_optimum() const { return known_optimum_; }
  void set_known_optimum(double v) { known_optimum_ = v; }
  const std::string& name() const { return name_; }
  void set_name(std::string n) { name_ = std::move(n); }

  bool is_terminal(VertexId v) const {
    return std::binary_search(terminals_.begin(), terminals_.end(), v);
  }

private:
  bool connected() const {
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(graph_.vertex_count()) + 1, 0);
    std::vector<VertexId> stack{1};
    seen[1] = 1;
    int count = 1;
    while (!stack.empty()) {
      VertexId v = stack.back();
      stack.pop_back();
      for (const Neighbor& nb : graph_.neighbors(v)) {
        if (!seen[static_cast<std::size_t>(nb.to)]) {
          seen[static_cast<std::size_t>(nb.to)] = 1;
          ++count;
          stack.push_back(nb.to);
        }
      }
    }
    return count == graph_.vertex_count();
  }

  Graph graph_;
  std::vector<VertexId> terminals_;
  std::optional<double> known_optimum_;
  std::string name_;
};

/// Name and known optimum are metadata; equality of substance is what the
/// round-trip guarantees.
inline bool structurally_equal(const Instance& a, const Instance& b) {
  return a.graph() == b.graph() && a.terminals() == b.terminals();
}

/// A solution tree: edge ids into the instance graph, their total length,
/// and the fitness evaluations consumed finding it.
struct SteinerSolution {
  std::vector<EdgeId> edges;
  double total_length = 0.0;
  std::int64_t fitness_evaluations = 0;
};

inline double edge_set_length(const Graph& g, const std::vector<EdgeId>& ids) {
  double s = 0.0;
  for (EdgeId id : ids) s += g.edge(id).length;
  return s;
}

/// Structural feasibility check: the edge set induces a tree containing
/// every terminal (or is empty with a single terminal).
inline bool is_steiner_tree(const Instance& inst, const std::vector<EdgeId>& edges) {
  const Graph& g = inst.graph();
  if (edges.empty()) return inst.terminal_count() == 1;
  std::vector<VertexId> parent(static_cast<std::size_t>(g.vertex_count()) + 1, 0);
  auto find = [&](VertexId v) {
    while (parent[static_cast<std::size_t>(v)] != v) {
      parent[static_cast<std::size_t>(v)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
      v = parent[static_cast<std::size_t>(v)];
    }
    return v;
  };
  std::vector<std::uint8_t> used(static_cast<std::size_t>(g.vertex_count()) + 1, 0);
  for (EdgeId id : edges) {
    const Edge& e = g.edge(id);
    used[static_cast<std::size_t>(e.u)] = used[static_cast<std::size_t>(e.v)] = 1;
    if (parent[static_cast<std::size_t>(e.u)] == 0) parent[static_cast<std::size_t>(e.u)] = e.u;
    if (parent[static_cast<std::size_t>(e.v)] == 0) parent[static_cast<std::size_t>(e.v)] = e.v;
    VertexId ru = find(e.u), rv = find(e.v);
    if (ru == rv) return false;  // cycle
    parent[static_cast<std::size_t>(ru)] = rv;
  }
  for (VertexId t : inst.terminals())
    if (!used[static_cast<std::size_t>(t)]) return false;
  VertexId root = find(inst.terminals().front());
  for (VertexId v = 1; v <= g.vertex_count(); ++v)
    if (used[static_cast<std::size_t>(v)] && find(v) != root) return false;
  return true;
}

}  // namespace pst
