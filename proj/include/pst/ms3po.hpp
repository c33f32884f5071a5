#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "pst/errors.hpp"
#include "pst/flow.hpp"
#include "pst/graph.hpp"
#include "pst/graph_algorithms.hpp"

namespace pst {

/// Parameters of the multi-source single-sink Physarum optimization run.
/// Field roles: base_current I0, cut_threshold eps, flux_gain alpha,
/// decay_rate mu, reinforcement delta, inner/outer iteration caps K and M.
struct Ms3poParams {
  double base_current = 1.0;
  double cut_threshold = 0.001;
  double flux_gain = 0.15;
  double decay_rate = 1.0;
  double reinforcement = 0.2;
  int inner_iterations = 1000;
  int outer_iterations = 1000;
  std::uint64_t seed = 0;
  std::int64_t max_fitness_evaluations = 1'000'000;
  bool prune_leaves = false;

  void validate() const {
    if (!(base_current > 0.0)) throw std::invalid_argument("base current must be positive");
    if (!(cut_threshold > 0.0)) throw std::invalid_argument("cut threshold must be positive");
    if (!(flux_gain > 0.0)) throw std::invalid_argument("flux gain must be positive");
    if (!(decay_rate > 0.0)) throw std::invalid_argument("decay rate must be positive");
    if (reinforcement < 0.0 || reinforcement >= 1.0)
      throw std::invalid_argument("reinforcement must lie in [0, 1)");
    if (inner_iterations < 1 || outer_iterations < 1)
      throw std::invalid_argument("iteration caps must be positive");
    if (max_fitness_evaluations < 1)
      throw std::invalid_argument("evaluation budget must be positive");
  }
};

namespace detail {

// Uniform double in [0, 1) from the top 53 bits; pinned across platforms.
inline double canonical_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Pick the sink terminal. Terminals are ranked by the total length of
/// live edges incident to them (ascending, vertex id breaking ties) and
/// the selection weight of each terminal is the incident total of its
/// mirror rank, so lightly-loaded terminals are the likeliest sinks.
inline VertexId select_sink(const Instance& inst, const EdgeMask& live, std::mt19937_64& rng) {
  const auto& terminals = inst.terminals();
  if (terminals.size() < 2) throw std::invalid_argument("sink selection needs at least 2 terminals");
  const Graph& g = inst.graph();

  std::vector<std::pair<double, VertexId>> ranked;
  ranked.reserve(terminals.size());
  double total = 0.0;
  for (VertexId t : terminals) {
    double incident = 0.0;
    for (const Neighbor& nb : g.neighbors(t))
      if (live[static_cast<std::size_t>(nb.edge)]) incident += g.edge(nb.edge).length;
    ranked.emplace_back(incident, t);
    total += incident;
  }
  if (!(total > 0.0)) throw InfeasibleError("every terminal is isolated in the live graph");
  std::sort(ranked.begin(), ranked.end());  // (incident total, vertex id)

  const std::size_t q = ranked.size();
  double target = detail::canonical_unit(rng) * total;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < q; ++i) {
    cumulative += ranked[q - 1 - i].first;  // mirror-rank weight
    if (target < cumulative) return ranked[i].second;
  }
  return ranked[q - 1].second;
}

/// One conductivity sweep: every live edge decays and grows with its flux,
/// then is reinforced or suppressed by membership in the best network.
/// With zero reinforcement both branches reduce to the plain update.
inline std::vector<double> update_conductivities(std::vector<double> conductivity,
                                                 const std::vector<double>& flux,
                                                 const EdgeMask& live, const EdgeMask& best_network,
                                                 const Ms3poParams& p) {
  for (std::size_t e = 0; e < conductivity.size(); ++e) {
    if (!live[e]) continue;
    double base = conductivity[e] + p.flux_gain * std::abs(flux[e]) - p.decay_rate * conductivity[e];
    conductivity[e] = best_network[e] ? (1.0 + p.reinforcement) * base
                                      : (1.0 - p.reinforcement) * base;
  }
  return conductivity;
}

/// Drop live edges whose conductivity fell below the threshold.
inline EdgeMask cut_edges(EdgeMask live, const std::vector<double>& conductivity, double threshold) {
  for (std::size_t e = 0; e < live.size(); ++e)
    if (live[e] && conductivity[e] < threshold) live[e] = 0;
  return live;
}

/// Iteratively delete degree-1 non-terminal vertices from a tree edge set.
inline std::vector<EdgeId> prune_non_terminal_leaves(const Graph& g, std::vector<EdgeId> tree,
                                                     std::span<const VertexId> terminals) {
  std::vector<int> degree(static_cast<std::size_t>(g.vertex_count()) + 1, 0);
  std::vector<std::uint8_t> is_term(static_cast<std::size_t>(g.vertex_count()) + 1, 0);
  for (VertexId t : terminals) is_term[static_cast<std::size_t>(t)] = 1;
  for (EdgeId id : tree) {
    ++degree[static_cast<std::size_t>(g.edge(id).u)];
    ++degree[static_cast<std::size_t>(g.edge(id).v)];
  }
  bool changed = true;
  std::vector<std::uint8_t> removed(tree.size(), 0);
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < tree.size(); ++i) {
      if (removed[i]) continue;
      const Edge& e = g.edge(tree[i]);
      VertexId leaf = 0;
      if (degree[static_cast<std::size_t>(e.u)] == 1 && !is_term[static_cast<std::size_t>(e.u)])
        leaf = e.u;
      else if (degree[static_cast<std::size_t>(e.v)] == 1 && !is_term[static_cast<std::size_t>(e.v)])
        leaf = e.v;
      if (leaf != 0) {
        removed[i] = 1;
        --degree[static_cast<std::size_t>(e.u)];
        --degree[static_cast<std::size_t>(e.v)];
        changed = true;
      }
    }
  }
  std::vector<EdgeId> out;
  for (std::size_t i = 0; i < tree.size(); ++i)
    if (!removed[i]) out.push_back(tree[i]);
  return out;
}

/// Full optimization run. Each outer iteration resets the live graph and
/// conductivities, then runs inner iterations of sink selection, pressure
/// solve, flux, conductivity sweep, threshold cut and terminal pruning.
/// The best terminal-spanning network seen is kept and reduced to its MST
/// at the end. Every completed inner iteration costs one fitness
/// evaluation; the run stops at the budget, or as soon as the best network
/// matches `known_optimum` when the caller supplies one.
inline SteinerSolution run_ms3po(const Instance& inst, const Ms3poParams& params,
                                 std::optional<double> known_optimum = std::nullopt) {
  params.validate();
  const Graph& g = inst.graph();
  const auto& terminals = inst.terminals();
  SteinerSolution sol;
  if (terminals.size() < 2) return sol;

  constexpr double kOptimumSlack = 1e-9;
  std::mt19937_64 rng(params.seed);

  EdgeMask best_mask = g.full_mask();
  double best_length = g.total_length();
  std::int64_t evaluations = 0;

  auto optimum_reached = [&] {
    return known_optimum && best_length <= *known_optimum + kOptimumSlack;
  };

  std::vector<double> conductivity;
  for (int m = 0; m < params.outer_iterations && !optimum_reached() &&
                  evaluations < params.max_fitness_evaluations;
       ++m) {
    EdgeMask live = g.full_mask();
    conductivity.assign(static_cast<std::size_t>(g.edge_count()), 1.0);
    for (int k = 0; k < params.inner_iterations; ++k) {
      VertexId sink;
      try {
        sink = select_sink(inst, live, rng);
      } catch (const InfeasibleError&) {
        break;
      }
      FluxBoundary boundary;
      boundary.sink = sink;
      boundary.base_current = params.base_current;
      for (VertexId t : terminals)
        if (t != sink) boundary.sources.push_back(t);

      std::vector<double> pressure;
      try {
        pressure = solve_pressures(g, live, conductivity, boundary);
      } catch (const SingularSystemError&) {
        break;  // terminals split since the last prune; restart from scratch
      }
      std::vector<double> flux = compute_fluxes(g, live, conductivity, pressure);
      conductivity = update_conductivities(std::move(conductivity), flux, live, best_mask, params);
      ++evaluations;

      live = cut_edges(std::move(live), conductivity, params.cut_threshold);
      live = prune_disconnected_edges(g, live, terminals);

      Components comps = connected_components(g, live);
      int home = comps.label[static_cast<std::size_t>(terminals.front())];
      bool spanning = true;
      for (VertexId t : terminals)
        if (comps.label[static_cast<std::size_t>(t)] != home) {
          spanning = false;
          break;
        }
      if (!spanning) break;  // unsolvable state; abort this outer iteration

      double live_length = 0.0;
      for (EdgeId id = 0; id < g.edge_count(); ++id)
        if (live[static_cast<std::size_t>(id)]) live_length += g.edge(id).length;
      if (live_length < best_length) {
        best_length = live_length;
        best_mask = live;
      }
      if (optimum_reached() || evaluations >= params.max_fitness_evaluations) break;
    }
  }

  // the final tree is the MST of the subgraph induced by the best
  // network's vertices, which can only improve on the network itself
  std::vector<std::uint8_t> in_best(static_cast<std::size_t>(g.vertex_count()) + 1, 0);
  for (EdgeId id = 0; id < g.edge_count(); ++id) {
    if (!best_mask[static_cast<std::size_t>(id)]) continue;
    in_best[static_cast<std::size_t>(g.edge(id).u)] = 1;
    in_best[static_cast<std::size_t>(g.edge(id).v)] = 1;
  }
  std::vector<VertexId> best_vertices;
  for (VertexId v = 1; v <= g.vertex_count(); ++v)
    if (in_best[static_cast<std::size_t>(v)]) best_vertices.push_back(v);
  sol.edges = minimum_spanning_tree(g, std::span<const VertexId>(best_vertices));
  if (params.prune_leaves)
    sol.edges = prune_non_terminal_leaves(g, std::move(sol.edges), terminals);
  sol.total_length = edge_set_length(g, sol.edges);
  sol.fitness_evaluations = evaluations;
  return sol;
}

}  // namespace pst
