#include "pmc/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <thread>

#include "pmc/executor.hpp"

namespace pmc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

std::uint64_t derive_subspace_seed(std::uint64_t master, std::size_t index) {
  return derive_seed(master, StreamKind::subspace, index);
}

int resolve_worker_count(const RunPlan& plan) {
  if (const char* env = std::getenv("PARTITION_MCMC_WORKERS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  if (plan.worker_count > 0) return plan.worker_count;
  return int(std::max(1u, std::thread::hardware_concurrency()));
}

RunTiming RunResult::timing() const {
  RunTiming t;
  for (const SubspaceReport& s : subspaces) {
    if (s.failed) continue;
    t.n_samples += double(s.n_samples);
    t.max_wall = std::max(t.max_wall, s.wall_seconds);
    t.sum_cpu += s.cpu_seconds;
  }
  return t;
}

RunResult run_pipeline(const RunPlan& plan) {
  plan.validate();
  RunResult result;
  result.plan = plan;

  TargetDensity target = resolve_target(plan.target_spec);
  result.target_name = target.name;
  result.dim = target.dim;
  result.support = target.support;

  const int workers = resolve_worker_count(plan);
  auto executor = make_executor(plan.executor, workers);

  // Step 1: exploration samples (timed separately; excluded from the rates).
  auto t_exp = Clock::now();
  ExplorationSampleSet exploration =
      explore(target, plan.exploration, plan.seed, workers);
  result.exploration_seconds = seconds_since(t_exp);

  // Step 2: partition tree.
  auto t_tree = Clock::now();
  result.tree = build_tree(exploration.points, target.support,
                           plan.max_subspaces, plan.min_rel_gain,
                           plan.partition_axes);
  result.tree_seconds = seconds_since(t_tree);
  const auto& leaves = result.tree.leaves();

  // Chain starts: the highest-density exploration points inside each leaf.
  // Low-density path points make poor starts in high dimension: chains
  // begun there drift to a leaf face near an out-of-leaf mode and sit.
  std::vector<std::vector<std::size_t>> leaf_points(leaves.size());
  for (std::size_t i = 0; i < exploration.points.rows(); ++i) {
    std::size_t k = result.tree.locate(exploration.points.row(i));
    leaf_points[k].push_back(i);
  }
  for (auto& pts : leaf_points)
    std::sort(pts.begin(), pts.end(), [&](std::size_t a, std::size_t b) {
      return exploration.log_densities[a] > exploration.log_densities[b];
    });

  auto integrator = make_integrator(plan.integrator, plan.integrator_cfg);

  // Steps 3-4: per-subspace sampling and integration on the worker pool.
  std::vector<SubspaceSamples> sampled(leaves.size());
  std::vector<SubspaceReport> reports(leaves.size());
  executor->run(leaves.size(), [&](std::size_t k) {
    SubspaceReport& rep = reports[k];
    rep.index = k;
    rep.box = leaves[k].box;
    rep.exploration_count = leaf_points[k].size();
    auto t0 = Clock::now();
    double cpu0 = thread_cpu_seconds();
    try {
      Matrix inits(0, target.dim);
      const auto& pts = leaf_points[k];
      std::size_t n_init =
          std::min<std::size_t>(plan.subspace.n_chains, pts.size());
      for (std::size_t c = 0; c < n_init; ++c)
        inits.push_row(exploration.points.row(pts[c]));

      SubspaceSamples ss =
          run_subspace(target, leaves[k].box, plan.subspace,
                       derive_subspace_seed(plan.seed, k), inits);
      ss.subspace_index = k;
      rep.n_samples = ss.size();
      rep.converged = ss.converged;
      rep.sampling_wall_seconds = ss.wall_seconds;
      rep.integral = integrator->integrate(ss, leaves[k]);
      sampled[k] = std::move(ss);
    } catch (const std::exception& e) {
      rep.failed = true;
      rep.error = e.what();
      rep.integral = IntegralEstimate{};  // weight 0
    }
    rep.wall_seconds = seconds_since(t0);
    rep.cpu_seconds = thread_cpu_seconds() - cpu0;
  });
  result.subspaces = std::move(reports);

  // Step 5: stitch the surviving subspaces.
  std::vector<std::pair<const SubspaceSamples*, IntegralEstimate>> stitched_in;
  for (std::size_t k = 0; k < leaves.size(); ++k) {
    const SubspaceReport& rep = result.subspaces[k];
    if (rep.failed) {
      result.degraded = true;
      result.warnings.push_back("subspace " + std::to_string(k) +
                                " failed: " + rep.error);
      continue;
    }
    if (rep.n_samples == 0) {
      result.degraded = true;
      result.warnings.push_back("subspace " + std::to_string(k) +
                                " produced no samples; coverage incomplete");
      continue;
    }
    stitched_in.emplace_back(&sampled[k], rep.integral);
  }
  if (stitched_in.empty()) {
    result.pipeline_failed = true;
    result.degraded = true;
    result.warnings.push_back("all subspaces failed; no stitched output");
    return result;
  }
  result.samples = stitch(stitched_in);

  if (result.samples.size() >= 10) {
    // Run-level effective size: one series per subspace (its chains
    // concatenated), contributions summed across subspaces. Chains of a
    // converged subspace share a distribution, so concatenating them is
    // benign, while chains stuck in different modes of one subspace show
    // up as the long-range correlation they really are.
    result.ess = ess_report_per_chain(result.samples.samples,
                                      result.samples.subspace_ids,
                                      plan.ess_max_lag);
    // chain ids restart at 0 in every subspace; key on both
    std::vector<std::uint32_t> run_chain(result.samples.size());
    for (std::size_t i = 0; i < run_chain.size(); ++i)
      run_chain[i] = (result.samples.subspace_ids[i] << 16) |
                     (result.samples.chain_ids[i] & 0xffffu);
    result.ess_per_chain = ess_report_per_chain(result.samples.samples,
                                                run_chain, plan.ess_max_lag);
  }
  if (plan.subspace.mode == SubspaceRunConfig::Mode::wall_clock)
    result.warnings.push_back(
        "wall-clock mode: sample counts are machine-dependent, run is not "
        "bit-reproducible");
  return result;
}

}  // namespace pmc
