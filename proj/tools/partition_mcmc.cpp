// Command-line front end: run one partitioned-sampling pipeline, run the
// benchmark grid, or recompute diagnostics on stored artifacts.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pmc/benchmark.hpp"
#include "pmc/io.hpp"
#include "pmc/orchestrator.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitPipeline = 1;
constexpr int kExitUsage = 2;

void apply_config_file(pmc::RunPlan& plan, const std::string& path) {
  json cfg = pmc::read_json_file(path);
  static const std::set<std::string> known = {
      "target", "seed", "explore_chains", "explore_samples_per_chain",
      "proposal_init_fraction", "max_subspaces", "min_rel_gain",
      "partition_axes", "chains_per_subspace", "samples_per_chain",
      "wall_clock_seconds", "wallclock_max_samples_per_chain",
      "burnin_max_cycles", "burnin_window", "accept_window", "rhat",
      "adapt_kappa", "adapt_center", "integrator", "integrator_min_samples",
      "integrator_mass_fraction", "integrator_max_density_ratio", "executor",
      "workers", "ess_max_lag", "out_dir"};
  for (auto it = cfg.begin(); it != cfg.end(); ++it)
    if (!known.count(it.key()))
      throw std::invalid_argument("config: unknown field '" + it.key() + "'");

  auto get = [&](const char* key, auto& dst) {
    if (cfg.contains(key)) dst = cfg.at(key).get<std::decay_t<decltype(dst)>>();
  };
  get("target", plan.target_spec);
  get("seed", plan.seed);
  get("explore_chains", plan.exploration.n_chains);
  get("explore_samples_per_chain", plan.exploration.samples_per_chain);
  get("proposal_init_fraction", plan.exploration.proposal_init_fraction);
  get("max_subspaces", plan.max_subspaces);
  get("min_rel_gain", plan.min_rel_gain);
  get("partition_axes", plan.partition_axes);
  get("chains_per_subspace", plan.subspace.n_chains);
  get("samples_per_chain", plan.subspace.samples_per_chain);
  get("wallclock_max_samples_per_chain",
      plan.subspace.wallclock_max_samples_per_chain);
  get("burnin_max_cycles", plan.subspace.burnin_max_cycles);
  get("burnin_window", plan.subspace.burnin_window);
  get("rhat", plan.subspace.rhat_threshold);
  get("adapt_kappa", plan.subspace.adapt_kappa);
  get("adapt_center", plan.subspace.adapt_center);
  get("integrator", plan.integrator);
  get("integrator_min_samples", plan.integrator_cfg.min_samples);
  get("integrator_mass_fraction", plan.integrator_cfg.mass_fraction);
  get("integrator_max_density_ratio", plan.integrator_cfg.max_density_ratio);
  get("executor", plan.executor);
  get("workers", plan.worker_count);
  get("ess_max_lag", plan.ess_max_lag);
  get("out_dir", plan.out_dir);
  if (cfg.contains("wall_clock_seconds")) {
    plan.subspace.wall_clock_seconds = cfg.at("wall_clock_seconds").get<double>();
    if (plan.subspace.wall_clock_seconds > 0.0)
      plan.subspace.mode = pmc::SubspaceRunConfig::Mode::wall_clock;
  }
  if (cfg.contains("accept_window")) {
    auto w = cfg.at("accept_window").get<std::vector<double>>();
    if (w.size() != 2)
      throw std::invalid_argument("config: field 'accept_window' needs 2 values");
    plan.subspace.target_accept_lo = w[0];
    plan.subspace.target_accept_hi = w[1];
  }
}

struct RunFlags {
  std::string config, target, out_dir, integrator, executor;
  std::uint64_t seed = 0;
  std::size_t max_subspaces = 0, explore_chains = 0, explore_samples = 0;
  std::size_t chains = 0, samples = 0, burnin_cycles = 0, burnin_window = 0;
  std::size_t wallclock_cap = 0, ess_max_lag = 0;
  double min_rel_gain = 0, wall_clock = 0, rhat = 0;
  std::vector<double> accept_window;
  std::vector<std::size_t> partition_axes;
  int workers = -1;
};

void add_run_options(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "JSON config file; flags override it");
  cmd->add_option("--target", f.target,
                  "benchmark target name (mix2d, mix9d) or JSON spec path");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--out", f.out_dir, "output directory for the artifacts");
  cmd->add_option("--max-subspaces", f.max_subspaces, "partition leaf budget");
  cmd->add_option("--min-rel-gain", f.min_rel_gain,
                  "stop partitioning below this relative cost gain");
  cmd->add_option("--partition-axes", f.partition_axes,
                  "restrict cuts to these axes");
  cmd->add_option("--explore-chains", f.explore_chains, "exploration chains");
  cmd->add_option("--explore-samples-per-chain", f.explore_samples,
                  "retained samples per exploration chain");
  cmd->add_option("--chains-per-subspace", f.chains, "MCMC chains per subspace");
  cmd->add_option("--samples-per-chain", f.samples,
                  "fixed-count samples per chain");
  cmd->add_option("--wall-clock-seconds", f.wall_clock,
                  "sampling budget per subspace; switches to wall-clock mode");
  cmd->add_option("--max-wallclock-samples-per-chain", f.wallclock_cap,
                  "per-chain cap in wall-clock mode (0 = unlimited)");
  cmd->add_option("--rhat", f.rhat, "split R-hat convergence threshold");
  cmd->add_option("--accept-window", f.accept_window,
                  "target acceptance window (two values)")
      ->expected(2);
  cmd->add_option("--burnin-max-cycles", f.burnin_cycles, "tuning cycle budget");
  cmd->add_option("--burnin-window", f.burnin_window, "steps per tuning cycle");
  cmd->add_option("--workers", f.workers,
                  "max concurrent subspace tasks (0 = hardware)");
  cmd->add_option("--executor", f.executor, "openmp or serial");
  cmd->add_option("--integrator", f.integrator, "subspace integrator name");
  cmd->add_option("--ess-max-lag", f.ess_max_lag,
                  "autocorrelation lag cap for the run report");
}

void apply_run_flags(const CLI::App* cmd, const RunFlags& f, pmc::RunPlan& plan) {
  if (!f.config.empty()) apply_config_file(plan, f.config);
  auto used = [&](const char* name) { return cmd->count(name) > 0; };
  if (used("--target")) plan.target_spec = f.target;
  if (used("--seed")) plan.seed = f.seed;
  if (used("--out")) plan.out_dir = f.out_dir;
  if (used("--max-subspaces")) plan.max_subspaces = f.max_subspaces;
  if (used("--min-rel-gain")) plan.min_rel_gain = f.min_rel_gain;
  if (used("--partition-axes")) plan.partition_axes = f.partition_axes;
  if (used("--explore-chains")) plan.exploration.n_chains = f.explore_chains;
  if (used("--explore-samples-per-chain"))
    plan.exploration.samples_per_chain = f.explore_samples;
  if (used("--chains-per-subspace")) plan.subspace.n_chains = f.chains;
  if (used("--samples-per-chain")) plan.subspace.samples_per_chain = f.samples;
  if (used("--wall-clock-seconds")) {
    plan.subspace.wall_clock_seconds = f.wall_clock;
    plan.subspace.mode = f.wall_clock > 0.0
                             ? pmc::SubspaceRunConfig::Mode::wall_clock
                             : pmc::SubspaceRunConfig::Mode::fixed_count;
  }
  if (used("--max-wallclock-samples-per-chain"))
    plan.subspace.wallclock_max_samples_per_chain = f.wallclock_cap;
  if (used("--rhat")) plan.subspace.rhat_threshold = f.rhat;
  if (used("--accept-window")) {
    plan.subspace.target_accept_lo = f.accept_window[0];
    plan.subspace.target_accept_hi = f.accept_window[1];
  }
  if (used("--burnin-max-cycles"))
    plan.subspace.burnin_max_cycles = f.burnin_cycles;
  if (used("--burnin-window")) plan.subspace.burnin_window = f.burnin_window;
  if (used("--workers")) plan.worker_count = f.workers;
  if (used("--executor")) plan.executor = f.executor;
  if (used("--integrator")) plan.integrator = f.integrator;
  if (used("--ess-max-lag")) plan.ess_max_lag = f.ess_max_lag;
}

int cmd_run(const CLI::App* cmd, const RunFlags& flags) {
  pmc::RunPlan plan;
  plan.out_dir = "pmc_run";
  apply_run_flags(cmd, flags, plan);
  plan.validate();

  pmc::RunResult result = pmc::run_pipeline(plan);
  std::string manifest = pmc::write_run_artifacts(result);
  for (const std::string& w : result.warnings)
    std::cerr << "warning: " << w << "\n";
  std::cout << "target " << result.target_name << ", "
            << result.tree.leaves().size() << " subspaces, "
            << result.samples.size() << " samples, integral "
            << result.samples.total_integral.value << " +- "
            << result.samples.total_integral.std_error << "\n"
            << "artifacts: " << manifest << "\n";
  return result.pipeline_failed ? kExitPipeline : kExitOk;
}

int cmd_benchmark(const CLI::App* cmd, const RunFlags& flags,
                  const pmc::BenchmarkGrid& grid_in, const std::string& out_csv) {
  pmc::BenchmarkGrid grid = grid_in;
  grid.base = pmc::default_benchmark_plan();
  apply_run_flags(cmd, flags, grid.base);
  grid.seed = grid.base.seed;
  grid.validate();
  grid.base.validate();

  auto rows = pmc::run_benchmark_grid(grid, &std::cerr);
  std::ofstream out(out_csv);
  if (!out) throw std::runtime_error("cannot write " + out_csv);
  out << pmc::benchmark_csv(rows);
  std::cout << rows.size() << " rows -> " << out_csv << "\n";
  bool any_failed = false;
  for (const auto& r : rows) any_failed = any_failed || r.n_samples == 0;
  return any_failed ? kExitPipeline : kExitOk;
}

int cmd_diagnose(const std::string& samples_path, const std::string& manifest_path,
                 const std::string& oracle, std::size_t oracle_n,
                 const std::string& baseline_path, std::uint64_t seed,
                 const std::string& out_path, std::size_t ess_max_lag) {
  pmc::WeightedSampleSet ws = pmc::read_samples_csv(samples_path);
  json manifest = pmc::read_json_file(manifest_path);
  json out;
  std::vector<std::string> warnings;

  // one series per subspace, matching the run manifest's convention
  pmc::EssReport ess =
      pmc::ess_report_per_chain(ws.samples, ws.subspace_ids, ess_max_lag);
  out["ess"] = {{"tau", ess.tau},
                {"n_eff", ess.n_eff},
                {"n_eff_mean", ess.n_eff_mean},
                {"n_eff_std", ess.n_eff_std},
                {"n_samples", ess.n_samples}};

  json ks_rows = json::array();
  if (oracle == "split-half") {
    std::size_t half = ws.size() / 2;
    for (std::size_t d = 0; d < ws.samples.cols(); ++d) {
      std::vector<double> col = ws.samples.column(d);
      std::span<const double> a(col.data(), half);
      std::span<const double> b(col.data() + half, ws.size() - half);
      std::span<const double> watop(ws.weights.data(), half);
      std::span<const double> wbot(ws.weights.data() + half, ws.size() - half);
      double ne = std::max(1.0, ess.n_eff[d] / 2.0);
      pmc::KsResult r = pmc::ks_two_sample(a, watop, b, wbot, ne, ne);
      ks_rows.push_back(
          {{"dim", d}, {"D", r.statistic}, {"p", r.p_value}});
    }
  } else {
    pmc::TargetDensity target = pmc::resolve_target(oracle);
    if (!target.has_oracle())
      throw std::invalid_argument("target has no i.i.d. oracle");
    if (target.dim != ws.samples.cols())
      throw std::invalid_argument("oracle dimension does not match samples");
    pmc::Rng rng(seed);
    pmc::Matrix draws(oracle_n, target.dim);
    for (std::size_t i = 0; i < oracle_n; ++i)
      target.iid_oracle(rng, draws.row(i));
    for (std::size_t d = 0; d < ws.samples.cols(); ++d) {
      std::vector<double> a = ws.samples.column(d);
      std::vector<double> b = draws.column(d);
      pmc::KsResult r = pmc::ks_two_sample(a, ws.weights, b, {}, ess.n_eff[d],
                                           double(oracle_n));
      ks_rows.push_back(
          {{"dim", d}, {"D", r.statistic}, {"p", r.p_value}});
    }
  }
  out["ks"] = ks_rows;

  if (!baseline_path.empty()) {
    try {
      json base = pmc::read_json_file(baseline_path);
      if (base.at("n_subspaces").get<std::size_t>() != 1)
        throw std::invalid_argument("baseline manifest must have S=1");
      pmc::RateReport rr = pmc::rate_report(pmc::timing_from_manifest(base),
                                            pmc::timing_from_manifest(manifest));
      out["rate"] = {{"sampling_rate", rr.sampling_rate},
                     {"per_chain_rate", rr.per_chain_rate}};
    } catch (const std::exception& e) {
      warnings.push_back(std::string("rate section omitted: ") + e.what());
    }
  } else {
    warnings.push_back("no baseline manifest given; rate section omitted");
  }

  out["warnings"] = warnings;
  std::ofstream f(out_path);
  if (!f) throw std::runtime_error("cannot write " + out_path);
  f << out.dump(2) << "\n";
  std::cout << "diagnostics -> " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel MCMC sampling via rectangular space partitioning"};
  app.require_subcommand(1);

  RunFlags run_flags;
  CLI::App* run = app.add_subcommand(
      "run", "run the full pipeline and write samples/manifest/tree artifacts");
  add_run_options(run, run_flags);

  RunFlags bench_flags;
  pmc::BenchmarkGrid grid;
  std::string bench_out = "benchmark.csv";
  CLI::App* bench = app.add_subcommand(
      "benchmark", "run the (subspaces x budgets x repetitions) grid");
  add_run_options(bench, bench_flags);
  bench->add_option("--subspaces", grid.subspace_counts, "S values");
  bench->add_option("--budgets", grid.budgets_seconds,
                    "wall-clock budgets in seconds");
  bench->add_option("--reps", grid.repetitions, "repetitions per cell");
  bench->add_option("--out-csv", bench_out, "summary table path");

  std::string d_samples, d_manifest, d_oracle, d_baseline, d_out = "diagnostics.json";
  std::size_t d_oracle_n = 100000, d_ess_lag = 4096;
  std::uint64_t d_seed = 1;
  CLI::App* diag = app.add_subcommand(
      "diagnose", "recompute ESS/KS/rate diagnostics from stored artifacts");
  diag->add_option("--samples", d_samples, "samples CSV")->required();
  diag->add_option("--manifest", d_manifest, "run manifest JSON")->required();
  diag->add_option("--oracle", d_oracle,
                   "target name/spec with an i.i.d. oracle, or 'split-half'")
      ->required();
  diag->add_option("--oracle-samples", d_oracle_n, "i.i.d. draws to compare");
  diag->add_option("--baseline", d_baseline, "S=1 manifest for rate metrics");
  diag->add_option("--seed", d_seed, "oracle draw seed");
  diag->add_option("--ess-max-lag", d_ess_lag, "autocorrelation lag cap");
  diag->add_option("--out", d_out, "diagnostics JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(run, run_flags);
    if (bench->parsed()) return cmd_benchmark(bench, bench_flags, grid, bench_out);
    if (diag->parsed())
      return cmd_diagnose(d_samples, d_manifest, d_oracle, d_oracle_n,
                          d_baseline, d_seed, d_out, d_ess_lag);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPipeline;
  }
  return kExitUsage;
}
