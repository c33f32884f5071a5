#pragma once

#include <random>
#include <vector>

#include "pst/graph.hpp"
#include "pst/graph_algorithms.hpp"

namespace pst {

/// Shortest Path Heuristic from a fixed start terminal: repeatedly attach
/// the terminal closest to the current tree via one shortest path.
/// Deterministic; ties on the closest terminal break toward the smaller
/// vertex id.
inline SteinerSolution sph_from(const Instance& inst, VertexId start) {
  const Graph& g = inst.graph();
  if (!inst.is_terminal(start)) throw std::invalid_argument("SPH start must be a terminal");
  SteinerSolution sol;
  if (inst.terminal_count() == 1) return sol;

  std::vector<std::uint8_t> in_tree(static_cast<std::size_t>(g.vertex_count()) + 1, 0);
  std::vector<VertexId> tree_vertices{start};
  in_tree[static_cast<std::size_t>(start)] = 1;
  std::vector<VertexId> remaining;
  for (VertexId t : inst.terminals())
    if (t != start) remaining.push_back(t);

  while (!remaining.empty()) {
    ShortestPathTree sp = shortest_paths(g, std::span<const VertexId>(tree_vertices));
    std::size_t pick = 0;
    for (std::size_t i = 1; i < remaining.size(); ++i)
      if (sp.distance[static_cast<std::size_t>(remaining[i])] <
          sp.distance[static_cast<std::size_t>(remaining[pick])])
        pick = i;  // remaining is ascending, so ties keep the smaller id
    VertexId t = remaining[pick];
    if (!sp.reachable(t)) throw InfeasibleError("terminal " + std::to_string(t) + " unreachable");
    for (EdgeId e : sp.path_edges(t)) sol.edges.push_back(e);
    for (VertexId v = t; v != 0; v = sp.parent[static_cast<std::size_t>(v)]) {
      if (in_tree[static_cast<std::size_t>(v)]) break;
      in_tree[static_cast<std::size_t>(v)] = 1;
      tree_vertices.push_back(v);
    }
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  std::sort(sol.edges.begin(), sol.edges.end());
  sol.total_length = edge_set_length(g, sol.edges);
  return sol;
}

/// SPH with a uniformly random start terminal.
inline SteinerSolution sph(const Instance& inst, std::mt19937_64& rng) {
  const auto& terminals = inst.terminals();
  VertexId start = terminals[static_cast<std::size_t>(rng() % terminals.size())];
  return sph_from(inst, start);
}

inline SteinerSolution sph(const Instance& inst, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sph(inst, rng);
}

}  // namespace pst
