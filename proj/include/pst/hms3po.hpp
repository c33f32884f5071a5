#pragma once

#include <map>
#include <queue>
#include <random>
#include <tuple>
#include <vector>

#include "pst/errors.hpp"
#include "pst/graph.hpp"
#include "pst/graph_algorithms.hpp"
#include "pst/ms3po.hpp"
#include "pst/sph.hpp"

namespace pst {

/// Hierarchical run parameters: the inner solver settings plus the
/// partitioner's imbalance factor and target partition count.
struct Hms3poParams {
  Ms3poParams inner;
  double imbalance = 2.0;    // each subset holds at most imbalance*|V|/targets vertices
  int target_partitions = 1;

  void validate(const Instance& inst) const {
    inner.validate();
    if (imbalance < 1.0) throw std::invalid_argument("imbalance must be >= 1");
    if (target_partitions < 1 || target_partitions > inst.terminal_count())
      throw std::invalid_argument("target partition count must lie in [1, |T|]");
  }
};

/// Vertex subsets seeded by the terminals. Subsets may overlap after
/// merging; each subset always contains at least one terminal.
struct PartitionSet {
  std::vector<std::vector<VertexId>> subsets;  // sorted vertex lists
};

/// Terminal-seeded region growth. Starting from one singleton subset per
/// terminal, repeatedly include the unassigned vertex closest to any
/// subset (distance to the nearest subset member; ties break toward the
/// smaller vertex id, and a vertex keeps the subset that first reached it
/// at equal distance) until the chosen subset is at the size cap, which
/// stops growth altogether and may leave vertices unassigned.
inline PartitionSet grow_partitions(const Instance& inst, const Hms3poParams& params) {
  params.validate(inst);
  const Graph& g = inst.graph();
  const double cap =
      params.imbalance * g.vertex_count() / static_cast<double>(params.target_partitions);

  std::vector<std::vector<VertexId>> subsets(inst.terminals().size());
  const std::size_t n = static_cast<std::size_t>(g.vertex_count()) + 1;
  std::vector<double> dist(n, kInfiniteDistance);
  std::vector<int> label(n, -1);
  std::vector<std::uint8_t> included(n, 0);

  using Item = std::pair<double, VertexId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;

  auto relax_from = [&](VertexId v, int subset) {
    for (const Neighbor& nb : g.neighbors(v)) {
      double cand = g.edge(nb.edge).length;  // distance from a member resets to zero
      if (included[static_cast<std::size_t>(nb.to)]) continue;
      if (cand < dist[static_cast<std::size_t>(nb.to)]) {
        dist[static_cast<std::size_t>(nb.to)] = cand;
        label[static_cast<std::size_t>(nb.to)] = subset;
        heap.emplace(cand, nb.to);
      }
    }
  };

  for (std::size_t i = 0; i < inst.terminals().size(); ++i) {
    VertexId t = inst.terminals()[i];
    subsets[i].push_back(t);
    included[static_cast<std::size_t>(t)] = 1;
    label[static_cast<std::size_t>(t)] = static_cast<int>(i);
    dist[static_cast<std::size_t>(t)] = 0.0;
  }
  for (std::size_t i = 0; i < inst.terminals().size(); ++i)
    relax_from(inst.terminals()[i], static_cast<int>(i));

  while (!heap.empty()) {
    auto [d, v] = heap.top();
    heap.pop();
    if (included[static_cast<std::size_t>(v)]) continue;
    if (d > dist[static_cast<std::size_t>(v)]) continue;  // stale entry
    int s = label[static_cast<std::size_t>(v)];
    if (!(static_cast<double>(subsets[static_cast<std::size_t>(s)].size()) <= cap - 1.0))
      break;  // the chosen subset is full: growth ends for everyone
    subsets[static_cast<std::size_t>(s)].push_back(v);
    included[static_cast<std::size_t>(v)] = 1;
    relax_from(v, s);
  }

  PartitionSet p;
  p.subsets = std::move(subsets);
  for (auto& sub : p.subsets) std::sort(sub.begin(), sub.end());
  return p;
}

/// Merge grown subsets down toward the target count: repeatedly take the
/// smallest subset and its closest neighbour subset (shortest-path
/// distance between vertex sets) and merge them together with the interior
/// vertices of the connecting path, unless that would exceed the cap.
inline PartitionSet merge_partitions(const Instance& inst, PartitionSet partition,
                                     const Hms3poParams& params) {
  params.validate(inst);
  const Graph& g = inst.graph();
  const double cap =
      params.imbalance * g.vertex_count() / static_cast<double>(params.target_partitions);
  auto& subsets = partition.subsets;

  while (static_cast<int>(subsets.size()) > params.target_partitions) {
    std::size_t smallest = 0;
    for (std::size_t i = 1; i < subsets.size(); ++i)
      if (subsets[i].size() < subsets[smallest].size()) smallest = i;

    ShortestPathTree sp = shortest_paths(g, std::span<const VertexId>(subsets[smallest]));
    std::size_t closest = subsets.size();
    double best_dist = kInfiniteDistance;
    VertexId best_entry = 0;
    for (std::size_t i = 0; i < subsets.size(); ++i) {
      if (i == smallest) continue;
      for (VertexId v : subsets[i]) {
        double d = sp.distance[static_cast<std::size_t>(v)];
        if (std::tie(d, v, i) < std::tie(best_dist, best_entry, closest)) {
          best_dist = d;
          best_entry = v;
          closest = i;
        }
      }
    }
    if (closest == subsets.size() || best_dist == kInfiniteDistance)
      break;  // nothing reachable to merge with

    std::vector<std::uint8_t> member(static_cast<std::size_t>(g.vertex_count()) + 1, 0);
    for (VertexId v : subsets[smallest]) member[static_cast<std::size_t>(v)] = 1;
    for (VertexId v : subsets[closest]) member[static_cast<std::size_t>(v)] = 1;
    std::vector<VertexId> interior;
    for (VertexId v : sp.path_interior(best_entry))
      if (!member[static_cast<std::size_t>(v)]) interior.push_back(v);

    double merged_size = static_cast<double>(subsets[smallest].size()) +
                         static_cast<double>(subsets[closest].size()) +
                         static_cast<double>(interior.size());
    if (!(merged_size <= cap)) break;  // cap would be violated: stop merging

    std::vector<VertexId> merged = subsets[smallest];
    merged.insert(merged.end(), subsets[closest].begin(), subsets[closest].end());
    merged.insert(merged.end(), interior.begin(), interior.end());
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

    std::size_t keep = std::min(smallest, closest);
    std::size_t drop = std::max(smallest, closest);
    subsets[keep] = std::move(merged);
    subsets.erase(subsets.begin() + static_cast<std::ptrdiff_t>(drop));
  }
  return partition;
}

/// One induced-subgraph instance per subset, with mappings back to the
/// parent graph.
struct SubgraphInstance {
  Instance instance;
  std::vector<VertexId> to_global_vertex;  // local id -> global id, [0] unused
  std::vector<EdgeId> to_global_edge;      // local edge id -> global edge id
};

inline std::vector<SubgraphInstance> build_subgraphs(const Instance& inst,
                                                     const PartitionSet& partition) {
  const Graph& g = inst.graph();
  std::vector<SubgraphInstance> out;
  out.reserve(partition.subsets.size());
  std::vector<int> local_of(static_cast<std::size_t>(g.vertex_count()) + 1, 0);
  for (const auto& subset : partition.subsets) {
    for (std::size_t i = 0; i < subset.size(); ++i)
      local_of[static_cast<std::size_t>(subset[i])] = static_cast<int>(i + 1);

    SubgraphInstance sg;
    sg.to_global_vertex.assign(subset.size() + 1, 0);
    for (std::size_t i = 0; i < subset.size(); ++i)
      sg.to_global_vertex[i + 1] = subset[i];

    std::vector<Edge> edges;
    for (EdgeId id = 0; id < g.edge_count(); ++id) {
      const Edge& e = g.edge(id);
      if (local_of[static_cast<std::size_t>(e.u)] && local_of[static_cast<std::size_t>(e.v)]) {
        edges.push_back({static_cast<VertexId>(local_of[static_cast<std::size_t>(e.u)]),
                         static_cast<VertexId>(local_of[static_cast<std::size_t>(e.v)]), e.length});
        sg.to_global_edge.push_back(id);
      }
    }
    std::vector<VertexId> terminals;
    for (VertexId t : inst.terminals())
      if (local_of[static_cast<std::size_t>(t)])
        terminals.push_back(static_cast<VertexId>(local_of[static_cast<std::size_t>(t)]));
    try {
      // Edge ids of the local graph coincide with to_global_edge order
      // because the induced edges are already (u, v)-sorted.
      sg.instance = Instance(Graph(static_cast<int>(subset.size()), std::move(edges)),
                             std::move(terminals), std::nullopt, inst.name());
    } catch (const std::invalid_argument& err) {
      throw InfeasibleError(std::string("partition produced an invalid subgraph: ") + err.what());
    }
    for (VertexId v : subset) local_of[static_cast<std::size_t>(v)] = 0;
    out.push_back(std::move(sg));
  }
  return out;
}

/// Contraction of stage-2 solutions into super-terminals.
struct ContractedGraph {
  Graph graph;                                  // super-terminals plus unabsorbed vertices
  std::vector<VertexId> super_terminals;        // contracted ids, ascending
  std::vector<EdgeId> edge_origin;              // contracted edge -> original edge
  std::vector<std::vector<EdgeId>> network_trees;  // original MST edges per super-terminal
  std::vector<VertexId> vertex_map;             // original vertex -> contracted id
};

/// Union the solution networks inside the parent graph, reduce each
/// connected network to its MST, then contract every MST to one
/// super-terminal. Contracted ids preserve the relative order of original
/// vertices; each contracted edge remembers the shortest original edge it
/// stands for.
inline ContractedGraph contract_solutions(const Instance& inst,
                                          const std::vector<std::vector<EdgeId>>& solution_edges,
                                          const std::vector<VertexId>& solitary_terminals) {
  const Graph& g = inst.graph();
  const std::size_t n = static_cast<std::size_t>(g.vertex_count()) + 1;

  EdgeMask in_union(static_cast<std::size_t>(g.edge_count()), 0);
  for (const auto& edges : solution_edges)
    for (EdgeId id : edges) in_union[static_cast<std::size_t>(id)] = 1;

  // connected networks over the union edges
  Components comps = connected_components(g, in_union);
  std::vector<std::uint8_t> in_network(n, 0);
  for (EdgeId id = 0; id < g.edge_count(); ++id) {
    if (!in_union[static_cast<std::size_t>(id)]) continue;
    in_network[static_cast<std::size_t>(g.edge(id).u)] = 1;
    in_network[static_cast<std::size_t>(g.edge(id).v)] = 1;
  }
  for (VertexId t : solitary_terminals) in_network[static_cast<std::size_t>(t)] = 1;

  // number networks and unabsorbed vertices by first appearance
  ContractedGraph out;
  out.vertex_map.assign(n, 0);
  std::vector<int> network_id(static_cast<std::size_t>(comps.count), -1);
  std::vector<std::vector<EdgeId>> network_edges;
  int next = 0;
  for (VertexId v = 1; v < static_cast<VertexId>(n); ++v) {
    if (in_network[static_cast<std::size_t>(v)]) {
      int c = comps.label[static_cast<std::size_t>(v)];
      if (network_id[static_cast<std::size_t>(c)] == -1) {
        network_id[static_cast<std::size_t>(c)] = ++next;
        out.super_terminals.push_back(next);
        network_edges.emplace_back();
      }
      out.vertex_map[static_cast<std::size_t>(v)] = network_id[static_cast<std::size_t>(c)];
    } else {
      out.vertex_map[static_cast<std::size_t>(v)] = ++next;
    }
  }
  for (EdgeId id = 0; id < g.edge_count(); ++id) {
    if (!in_union[static_cast<std::size_t>(id)]) continue;
    int c = comps.label[static_cast<std::size_t>(g.edge(id).u)];
    int super = network_id[static_cast<std::size_t>(c)];
    std::size_t slot = static_cast<std::size_t>(
        std::lower_bound(out.super_terminals.begin(), out.super_terminals.end(), super) -
        out.super_terminals.begin());
    network_edges[slot].push_back(id);
  }
  out.network_trees.resize(network_edges.size());
  for (std::size_t i = 0; i < network_edges.size(); ++i)
    out.network_trees[i] = mst_of_edge_subgraph(g, network_edges[i]);

  // contracted edges keep the shortest original edge between their images
  std::map<std::pair<VertexId, VertexId>, EdgeId> rep;
  for (EdgeId id = 0; id < g.edge_count(); ++id) {
    const Edge& e = g.edge(id);
    VertexId cu = out.vertex_map[static_cast<std::size_t>(e.u)];
    VertexId cv = out.vertex_map[static_cast<std::size_t>(e.v)];
    if (cu == cv) continue;
    auto key = std::make_pair(std::min(cu, cv), std::max(cu, cv));
    auto [it, inserted] = rep.emplace(key, id);
    if (!inserted && e.length < g.edge(it->second).length) it->second = id;
  }
  std::vector<Edge> contracted;
  contracted.reserve(rep.size());
  for (const auto& [key, id] : rep) {
    contracted.push_back({key.first, key.second, g.edge(id).length});
    out.edge_origin.push_back(id);
  }
  // Graph construction sorts by (u, v); rep map iterates in that order
  // already, so edge ids and edge_origin stay aligned.
  out.graph = Graph(next, std::move(contracted));
  return out;
}

/// Outcome of a hierarchical run: the tree plus partitioning telemetry.
struct Hms3poResult {
  SteinerSolution solution;
  int realized_partitions = 0;
  bool sph_fallback_won = false;
};

/// Three-stage hierarchical run: partition the graph around terminals,
/// solve each multi-terminal subgraph independently, then contract the
/// stage-2 trees and connect them with the shortest-path heuristic. The
/// result is never longer than plain SPH on the same instance and seed;
/// whichever of the two is shorter is returned.
inline Hms3poResult run_hms3po(const Instance& inst, const Hms3poParams& params) {
  params.validate(inst);
  const Graph& g = inst.graph();
  Hms3poResult result;
  if (inst.terminal_count() == 1) {
    result.realized_partitions = 1;
    return result;
  }

  PartitionSet partition = merge_partitions(inst, grow_partitions(inst, params), params);
  result.realized_partitions = static_cast<int>(partition.subsets.size());
  std::vector<SubgraphInstance> subgraphs = build_subgraphs(inst, partition);

  std::int64_t multi = 0;
  for (const auto& sg : subgraphs)
    if (sg.instance.terminal_count() >= 2) ++multi;
  std::int64_t budget_each =
      multi > 0 ? std::max<std::int64_t>(1, params.inner.max_fitness_evaluations / multi) : 0;

  std::vector<std::vector<EdgeId>> stage2_edges;
  std::vector<VertexId> solitary;
  std::int64_t evaluations = 0;
  for (std::size_t i = 0; i < subgraphs.size(); ++i) {
    const SubgraphInstance& sg = subgraphs[i];
    if (sg.instance.terminal_count() < 2) {
      solitary.push_back(sg.to_global_vertex[static_cast<std::size_t>(sg.instance.terminals()[0])]);
      continue;
    }
    Ms3poParams sub = params.inner;
    sub.seed = params.inner.seed ^ static_cast<std::uint64_t>(i);
    sub.max_fitness_evaluations = budget_each;
    SteinerSolution sol = run_ms3po(sg.instance, sub);
    evaluations += sol.fitness_evaluations;
    std::vector<EdgeId> global_edges;
    global_edges.reserve(sol.edges.size());
    for (EdgeId e : sol.edges)
      global_edges.push_back(sg.to_global_edge[static_cast<std::size_t>(e)]);
    stage2_edges.push_back(std::move(global_edges));
  }

  ContractedGraph contracted = contract_solutions(inst, stage2_edges, solitary);

  std::vector<EdgeId> combined;
  for (const auto& tree : contracted.network_trees)
    combined.insert(combined.end(), tree.begin(), tree.end());
  if (contracted.super_terminals.size() > 1) {
    Instance stage3(contracted.graph, contracted.super_terminals, std::nullopt, inst.name());
    std::mt19937_64 rng(params.inner.seed);
    SteinerSolution bridge = sph(stage3, rng);
    for (EdgeId ce : bridge.edges)
      combined.push_back(contracted.edge_origin[static_cast<std::size_t>(ce)]);
  }
  std::sort(combined.begin(), combined.end());
  double combined_length = edge_set_length(g, combined);

  std::mt19937_64 plain_rng(params.inner.seed);
  SteinerSolution plain = sph(inst, plain_rng);

  if (plain.total_length < combined_length) {
    result.solution = std::move(plain);
    result.sph_fallback_won = true;
  } else {
    result.solution.edges = std::move(combined);
    result.solution.total_length = combined_length;
  }
  result.solution.fitness_evaluations = evaluations;
  return result;
}

}  // namespace pst
