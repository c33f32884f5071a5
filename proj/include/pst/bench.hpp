#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "pst/dreyfus_wagner.hpp"
#include "pst/graph.hpp"
#include "pst/hms3po.hpp"
#include "pst/ms3po.hpp"
#include "pst/sph.hpp"
#include "pst/stp_io.hpp"

namespace pst {

enum class Algorithm { Ms3po, Hms3po, Sph, Exact };

inline std::optional<Algorithm> parse_algorithm(const std::string& s) {
  if (s == "ms3po") return Algorithm::Ms3po;
  if (s == "hms3po") return Algorithm::Hms3po;
  if (s == "sph") return Algorithm::Sph;
  if (s == "exact") return Algorithm::Exact;
  return std::nullopt;
}

inline const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::Ms3po: return "ms3po";
    case Algorithm::Hms3po: return "hms3po";
    case Algorithm::Sph: return "sph";
    case Algorithm::Exact: return "exact";
  }
  return "?";
}

/// One benchmark row. Aggregate rows leave seed empty; `__all__` rows
/// carry only the algorithm and its mean error.
struct RunRecord {
  std::string instance_name;
  int vertices = 0;
  int edges = 0;
  int terminals = 0;
  std::string algorithm;
  std::optional<std::uint64_t> seed;
  double solution_length = 0.0;
  std::optional<double> optimum;
  std::optional<double> error_percent;
  std::int64_t fitness_evaluations = 0;
  std::optional<int> realized_partitions;
  std::int64_t wall_ms = 0;
};

inline constexpr const char* kCsvHeader =
    "instance,vertices,edges,terminals,algorithm,seed,solution_length,optimum,error_percent,"
    "fitness_evaluations,realized_partitions,wall_ms";

namespace detail {

inline std::string format_number(double v) {
  long long as_int = static_cast<long long>(v);
  if (v == static_cast<double>(as_int)) return std::to_string(as_int);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace detail

inline std::string to_csv_row(const RunRecord& r) {
  std::string row = r.instance_name;
  row += ',' + std::to_string(r.vertices);
  row += ',' + std::to_string(r.edges);
  row += ',' + std::to_string(r.terminals);
  row += ',' + r.algorithm;
  row += ',' + (r.seed ? std::to_string(*r.seed) : std::string());
  row += ',' + detail::format_number(r.solution_length);
  row += ',' + (r.optimum ? detail::format_number(*r.optimum) : std::string());
  row += ',' + (r.error_percent ? detail::format_number(*r.error_percent) : std::string());
  row += ',' + std::to_string(r.fitness_evaluations);
  row += ',' + (r.realized_partitions ? std::to_string(*r.realized_partitions) : std::string());
  row += ',' + std::to_string(r.wall_ms);
  return row;
}

inline nlohmann::ordered_json to_json(const RunRecord& r) {
  nlohmann::ordered_json j;
  j["instance"] = r.instance_name;
  j["vertices"] = r.vertices;
  j["edges"] = r.edges;
  j["terminals"] = r.terminals;
  j["algorithm"] = r.algorithm;
  if (r.seed) j["seed"] = *r.seed; else j["seed"] = nullptr;
  j["solution_length"] = r.solution_length;
  if (r.optimum) j["optimum"] = *r.optimum; else j["optimum"] = nullptr;
  if (r.error_percent) j["error_percent"] = *r.error_percent; else j["error_percent"] = nullptr;
  j["fitness_evaluations"] = r.fitness_evaluations;
  if (r.realized_partitions) j["realized_partitions"] = *r.realized_partitions;
  else j["realized_partitions"] = nullptr;
  j["wall_ms"] = r.wall_ms;
  return j;
}

/// Shared knobs for solve/bench runs. The MS3-PO block doubles as the
/// inner solver configuration of HMS3-PO.
struct BenchParams {
  Ms3poParams ms3po;
  double imbalance = 2.0;
  std::optional<int> target_partitions;  // default: about one partition per 5 terminals
  bool timing = true;
};

inline int default_partition_count(const Instance& inst) {
  int t = inst.terminal_count();
  return std::clamp((t + 4) / 5, 1, t);
}

/// Run one algorithm on one instance. The known optimum (when present)
/// becomes the MS3-PO stop hint and the error denominator.
inline RunRecord run_one(const Instance& inst, Algorithm alg, std::uint64_t seed,
                         const BenchParams& bp) {
  RunRecord rec;
  rec.instance_name = inst.name();
  rec.vertices = inst.graph().vertex_count();
  rec.edges = inst.graph().edge_count();
  rec.terminals = inst.terminal_count();
  rec.algorithm = algorithm_name(alg);
  rec.seed = seed;

  auto t0 = std::chrono::steady_clock::now();
  SteinerSolution sol;
  switch (alg) {
    case Algorithm::Ms3po: {
      Ms3poParams p = bp.ms3po;
      p.seed = seed;
      sol = run_ms3po(inst, p, inst.known_optimum());
      break;
    }
    case Algorithm::Hms3po: {
      Hms3poParams p;
      p.inner = bp.ms3po;
      p.inner.seed = seed;
      p.imbalance = bp.imbalance;
      p.target_partitions = bp.target_partitions
                                ? std::clamp(*bp.target_partitions, 1, inst.terminal_count())
                                : default_partition_count(inst);
      Hms3poResult res = run_hms3po(inst, p);
      sol = std::move(res.solution);
      rec.realized_partitions = res.realized_partitions;
      break;
    }
    case Algorithm::Sph: {
      sol = sph(inst, seed);
      break;
    }
    case Algorithm::Exact: {
      sol = exact_dreyfus_wagner(inst);
      break;
    }
  }
  auto t1 = std::chrono::steady_clock::now();
  if (!is_steiner_tree(inst, sol.edges))
    throw std::logic_error("solver returned an infeasible solution on " + inst.name());

  rec.solution_length = sol.total_length;
  rec.fitness_evaluations = sol.fitness_evaluations;
  if (bp.timing)
    rec.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
  if (inst.known_optimum()) {
    rec.optimum = *inst.known_optimum();
    rec.error_percent = 100.0 * (sol.total_length - *rec.optimum) / *rec.optimum;
  }
  return rec;
}

/// Run algorithms x seeds over the instances, optionally across threads.
/// Row order is deterministic: (instance index, algorithm, seed), no
/// matter how many workers run. Instances whose terminal count exceeds the
/// exact solver's guard are skipped for `exact` with a note in `warnings`.
inline std::vector<RunRecord> run_sweep(const std::vector<Instance>& instances,
                                        const std::vector<Algorithm>& algorithms,
                                        const std::vector<std::uint64_t>& seeds,
                                        const BenchParams& bp, int jobs,
                                        std::vector<std::string>* warnings = nullptr) {
  struct Task {
    std::size_t instance;
    Algorithm alg;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < instances.size(); ++i)
    for (Algorithm a : algorithms)
      for (std::uint64_t s : seeds) tasks.push_back({i, a, s});

  std::vector<std::optional<RunRecord>> slots(tasks.size());
  std::vector<std::string> notes(tasks.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = cursor.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& t = tasks[i];
      try {
        slots[i] = run_one(instances[t.instance], t.alg, t.seed, bp);
      } catch (const TerminalLimitError& e) {
        notes[i] = instances[t.instance].name() + ": " + e.what();
      }
    }
  };
  int workers = std::max(1, jobs);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<RunRecord> rows;
  rows.reserve(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (slots[i]) rows.push_back(std::move(*slots[i]));
    else if (warnings && !notes[i].empty()) warnings->push_back(notes[i]);
  }
  return rows;
}

/// Per-algorithm mean error across all rows that have one; appended as
/// `__all__` rows.
inline void append_mean_rows(std::vector<RunRecord>& rows) {
  std::vector<std::string> algs;
  for (const RunRecord& r : rows)
    if (r.seed && std::find(algs.begin(), algs.end(), r.algorithm) == algs.end())
      algs.push_back(r.algorithm);
  for (const std::string& a : algs) {
    double sum = 0.0;
    int count = 0;
    for (const RunRecord& r : rows) {
      if (!r.seed || r.algorithm != a || !r.error_percent) continue;
      sum += *r.error_percent;
      ++count;
    }
    if (count == 0) continue;
    RunRecord mean;
    mean.instance_name = "__all__";
    mean.algorithm = a;
    mean.error_percent = sum / count;
    rows.push_back(std::move(mean));
  }
}

/// Median fitness evaluations and error per (instance, algorithm),
/// appended as seedless rows; reproduces the odd-run median protocol.
inline void append_median_rows(std::vector<RunRecord>& rows) {
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[(v.size() - 1) / 2];
  };
  std::vector<std::pair<std::string, std::string>> groups;
  for (const RunRecord& r : rows)
    if (r.seed) {
      auto key = std::make_pair(r.instance_name, r.algorithm);
      if (std::find(groups.begin(), groups.end(), key) == groups.end()) groups.push_back(key);
    }
  for (const auto& [name, alg] : groups) {
    std::vector<double> evals, errors;
    RunRecord proto;
    for (const RunRecord& r : rows) {
      if (!r.seed || r.instance_name != name || r.algorithm != alg) continue;
      evals.push_back(static_cast<double>(r.fitness_evaluations));
      if (r.error_percent) errors.push_back(*r.error_percent);
      proto = r;
    }
    if (evals.empty()) continue;
    RunRecord med;
    med.instance_name = name;
    med.vertices = proto.vertices;
    med.edges = proto.edges;
    med.terminals = proto.terminals;
    med.algorithm = alg;
    med.solution_length = 0.0;
    med.optimum = proto.optimum;
    if (!errors.empty()) med.error_percent = median(errors);
    med.fitness_evaluations = static_cast<std::int64_t>(median(evals));
    rows.push_back(std::move(med));
  }
}

inline std::string format_report(const std::vector<RunRecord>& rows, const std::string& format) {
  if (format == "json") {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const RunRecord& r : rows) arr.push_back(to_json(r));
    return arr.dump(2) + "\n";
  }
  std::string out = kCsvHeader;
  out += '\n';
  for (const RunRecord& r : rows) {
    out += to_csv_row(r);
    out += '\n';
  }
  return out;
}

}  // namespace pst
