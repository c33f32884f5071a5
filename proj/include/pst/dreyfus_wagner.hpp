#pragma once

#include <bit>
#include <queue>
#include <vector>

#include "pst/errors.hpp"
#include "pst/graph.hpp"
#include "pst/graph_algorithms.hpp"

namespace pst {

/// State-space guard: the dynamic program is exponential in |T|.
inline constexpr int kExactTerminalLimit = 12;

/// Exact Steiner minimum tree by dynamic programming over terminal
/// subsets. One terminal is the root; states are (subset of the others,
/// attachment vertex). Each subset round merges split trees and then
/// relaxes along graph edges with a Dijkstra sweep.
inline SteinerSolution exact_dreyfus_wagner(const Instance& inst) {
  const Graph& g = inst.graph();
  const auto& terminals = inst.terminals();
  const int q = static_cast<int>(terminals.size());
  if (q > kExactTerminalLimit)
    throw TerminalLimitError("exact solver refuses |T| = " + std::to_string(q) + " > " +
                             std::to_string(kExactTerminalLimit));
  SteinerSolution sol;
  if (q == 1) return sol;

  const VertexId root = terminals.back();
  const int b = q - 1;  // non-root terminals
  const std::size_t n = static_cast<std::size_t>(g.vertex_count()) + 1;
  const std::size_t masks = std::size_t{1} << b;

  // back[S][v]: edge >= 0 -> reached along that edge; edge == -1 ->
  // formed by merging submask `aux` with its complement; edge == -2 -> base.
  struct Back {
    EdgeId edge = -2;
    int aux = 0;
  };
  std::vector<std::vector<double>> cost(masks);
  std::vector<std::vector<Back>> back(masks);

  using Item = std::pair<double, VertexId>;
  for (std::size_t mask = 1; mask < masks; ++mask) {
    cost[mask].assign(n, kInfiniteDistance);
    back[mask].assign(n, Back{});
    auto& c = cost[mask];
    auto& bk = back[mask];
    if ((mask & (mask - 1)) == 0) {
      int i = std::countr_zero(mask);
      c[static_cast<std::size_t>(terminals[static_cast<std::size_t>(i)])] = 0.0;
    } else {
      for (std::size_t sub = (mask - 1) & mask; sub; sub = (sub - 1) & mask) {
        std::size_t rest = mask ^ sub;
        if (sub > rest) continue;  // each split once
        const auto& cs = cost[sub];
        const auto& cr = cost[rest];
        for (std::size_t v = 1; v < n; ++v) {
          double merged = cs[v] + cr[v];
          if (merged < c[v]) {
            c[v] = merged;
            bk[v] = {-1, static_cast<int>(sub)};
          }
        }
      }
    }
    // Dijkstra sweep seeded with the merged labels
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (std::size_t v = 1; v < n; ++v)
      if (c[v] < kInfiniteDistance) heap.emplace(c[v], static_cast<VertexId>(v));
    while (!heap.empty()) {
      auto [d, v] = heap.top();
      heap.pop();
      if (d > c[static_cast<std::size_t>(v)]) continue;
      for (const Neighbor& nb : g.neighbors(v)) {
        double nd = d + g.edge(nb.edge).length;
        if (nd < c[static_cast<std::size_t>(nb.to)]) {
          c[static_cast<std::size_t>(nb.to)] = nd;
          bk[static_cast<std::size_t>(nb.to)] = {nb.edge, 0};
          heap.emplace(nd, nb.to);
        }
      }
    }
  }

  // expand back-pointers into the edge set
  std::vector<std::pair<std::size_t, VertexId>> stack{{masks - 1, root}};
  while (!stack.empty()) {
    auto [mask, v] = stack.back();
    stack.pop_back();
    const Back& bk = back[mask][static_cast<std::size_t>(v)];
    if (bk.edge >= 0) {
      sol.edges.push_back(bk.edge);
      const Edge& e = g.edge(bk.edge);
      stack.emplace_back(mask, e.u == v ? e.v : e.u);
    } else if (bk.edge == -1) {
      stack.emplace_back(static_cast<std::size_t>(bk.aux), v);
      stack.emplace_back(mask ^ static_cast<std::size_t>(bk.aux), v);
    }
  }
  std::sort(sol.edges.begin(), sol.edges.end());
  sol.edges.erase(std::unique(sol.edges.begin(), sol.edges.end()), sol.edges.end());
  sol.total_length = edge_set_length(g, sol.edges);
  return sol;
}

}  // namespace pst
