// Command-line front end: `pst solve` runs one algorithm on one instance,
// `pst bench` sweeps algorithms x seeds over a directory of instances.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pst/bench.hpp"
#include "pst/stp_io.hpp"

namespace {

struct Options {
  std::string instance_path;
  std::string bench_dir;
  std::string algorithm = "ms3po";
  std::vector<std::string> algorithms;
  std::uint64_t seed = 1;
  std::string seeds = "1..1";
  std::int64_t budget = 1'000'000;
  double base_current = 1.0;
  double epsilon = 0.001;
  double alpha = 0.15;
  double mu = 1.0;
  double delta = 0.2;
  int inner_iterations = 1000;
  int outer_iterations = 0;  // 0: derive from budget and K
  double imbalance = 2.0;
  int partitions = 0;  // 0: default heuristic
  std::string optima_path;
  std::string format = "csv";
  int jobs = 1;
  std::string aggregate;
  std::string out_path;
  bool prune_leaves = false;
  bool no_timing = false;
};

pst::BenchParams make_params(const Options& opt) {
  pst::BenchParams bp;
  bp.ms3po.base_current = opt.base_current;
  bp.ms3po.cut_threshold = opt.epsilon;
  bp.ms3po.flux_gain = opt.alpha;
  bp.ms3po.decay_rate = opt.mu;
  bp.ms3po.reinforcement = opt.delta;
  bp.ms3po.inner_iterations = opt.inner_iterations;
  bp.ms3po.max_fitness_evaluations = opt.budget;
  bp.ms3po.prune_leaves = opt.prune_leaves;
  bp.ms3po.outer_iterations =
      opt.outer_iterations > 0
          ? opt.outer_iterations
          : static_cast<int>((opt.budget + opt.inner_iterations - 1) / opt.inner_iterations);
  bp.imbalance = opt.imbalance;
  if (opt.partitions > 0) bp.target_partitions = opt.partitions;
  bp.timing = !opt.no_timing;
  return bp;
}

std::vector<std::uint64_t> parse_seed_range(const std::string& spec) {
  auto dots = spec.find("..");
  std::uint64_t lo, hi;
  if (dots == std::string::npos) {
    lo = hi = std::stoull(spec);
  } else {
    lo = std::stoull(spec.substr(0, dots));
    hi = std::stoull(spec.substr(dots + 2));
  }
  if (hi < lo) throw CLI::ValidationError("--seeds", "range end below start");
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
  return seeds;
}

void write_report(const std::string& report, const std::string& out_path) {
  if (out_path.empty()) {
    std::fputs(report.c_str(), stdout);
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << report;
  }
}

int do_solve(const Options& opt) {
  pst::OptimumRegistry registry;
  if (!opt.optima_path.empty()) registry = pst::load_optima_file(opt.optima_path);
  pst::Instance inst =
      pst::load_instance(opt.instance_path, opt.optima_path.empty() ? nullptr : &registry);
  if (!opt.optima_path.empty() && !inst.known_optimum())
    std::cerr << "warning: no optimum known for " << inst.name() << "\n";

  auto alg = pst::parse_algorithm(opt.algorithm);
  if (!alg) throw CLI::ValidationError("--alg", "unknown algorithm " + opt.algorithm);
  pst::RunRecord rec = pst::run_one(inst, *alg, opt.seed, make_params(opt));

  if (opt.format == "json") {
    write_report(pst::to_json(rec).dump(2) + "\n", opt.out_path);
  } else {
    write_report(std::string(pst::kCsvHeader) + "\n" + pst::to_csv_row(rec) + "\n", opt.out_path);
  }
  return 0;
}

int do_bench(const Options& opt) {
  pst::OptimumRegistry registry;
  if (!opt.optima_path.empty()) registry = pst::load_optima_file(opt.optima_path);

  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(opt.bench_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".stp")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  std::vector<pst::Instance> instances;
  for (const auto& f : files) {
    instances.push_back(
        pst::load_instance(f.string(), opt.optima_path.empty() ? nullptr : &registry));
    if (!opt.optima_path.empty() && !instances.back().known_optimum())
      std::cerr << "warning: no optimum known for " << instances.back().name() << "\n";
  }

  std::vector<pst::Algorithm> algorithms;
  std::vector<std::string> names = opt.algorithms.empty()
                                       ? std::vector<std::string>{opt.algorithm}
                                       : opt.algorithms;
  for (const std::string& name : names) {
    auto alg = pst::parse_algorithm(name);
    if (!alg) throw CLI::ValidationError("--alg", "unknown algorithm " + name);
    algorithms.push_back(*alg);
  }

  std::vector<std::string> warnings;
  std::vector<pst::RunRecord> rows = pst::run_sweep(instances, algorithms,
                                                    parse_seed_range(opt.seeds), make_params(opt),
                                                    opt.jobs, &warnings);
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
  pst::append_mean_rows(rows);
  if (opt.aggregate == "median") pst::append_median_rows(rows);
  write_report(pst::format_report(rows, opt.format), opt.out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physarum-inspired Steiner tree solvers over SteinLib instances"};
  app.require_subcommand(1);
  Options opt;

  auto add_solver_flags = [&](CLI::App* cmd) {
    cmd->add_option("--budget", opt.budget, "fitness evaluation budget")->capture_default_str();
    cmd->add_option("--I0", opt.base_current, "source current")->capture_default_str();
    cmd->add_option("--epsilon", opt.epsilon, "conductivity cut threshold")->capture_default_str();
    cmd->add_option("--alpha", opt.alpha, "flux gain")->capture_default_str();
    cmd->add_option("--mu", opt.mu, "conductivity decay rate")->capture_default_str();
    cmd->add_option("--delta", opt.delta, "best-network reinforcement")->capture_default_str();
    cmd->add_option("--K", opt.inner_iterations, "inner iterations per reset")
        ->capture_default_str();
    cmd->add_option("--M", opt.outer_iterations, "outer resets (0 = budget/K)")
        ->capture_default_str();
    cmd->add_option("--d", opt.imbalance, "partition imbalance factor")->capture_default_str();
    cmd->add_option("--n", opt.partitions, "target partition count (0 = auto)")
        ->capture_default_str();
    cmd->add_option("--optima", opt.optima_path, "known-optimum registry CSV");
    cmd->add_option("--format", opt.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    cmd->add_option("--out", opt.out_path, "write the report here instead of stdout");
    cmd->add_flag("--prune-leaves", opt.prune_leaves, "prune non-terminal leaves from the tree");
    cmd->add_flag("--no-timing", opt.no_timing, "report wall_ms as 0 for reproducible output");
  };

  CLI::App* solve = app.add_subcommand("solve", "solve one instance and print a run record");
  solve->add_option("instance", opt.instance_path, "STP instance file")->required();
  solve->add_option("--alg", opt.algorithm, "ms3po|hms3po|sph|exact")->capture_default_str();
  solve->add_option("--seed", opt.seed, "RNG seed")->capture_default_str();
  add_solver_flags(solve);

  CLI::App* bench = app.add_subcommand("bench", "sweep algorithms x seeds over a directory");
  bench->add_option("dir", opt.bench_dir, "directory of .stp files")->required();
  bench->add_option("--alg", opt.algorithms, "algorithms to run (repeatable)");
  bench->add_option("--seeds", opt.seeds, "seed range a..b or single seed")
      ->capture_default_str();
  bench->add_option("--jobs", opt.jobs, "worker threads")->capture_default_str();
  bench->add_option("--aggregate", opt.aggregate, "append aggregate rows (median)")
      ->check(CLI::IsMember({"median"}));
  add_solver_flags(bench);

  CLI11_PARSE(app, argc, argv);
  try {
    if (solve->parsed()) return do_solve(opt);
    return do_bench(opt);
  } catch (const pst::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const pst::TerminalLimitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
