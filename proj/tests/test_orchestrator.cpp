#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>

#include "pmc/io.hpp"
#include "pmc/orchestrator.hpp"

using namespace pmc;

namespace {

RunPlan small_2d_plan() {
  RunPlan plan;
  plan.target_spec = "mix2d";
  plan.seed = 7;
  plan.max_subspaces = 30;
  plan.min_rel_gain = 0.0;
  // enough exploration that the 2% modes are reliably seeded
  plan.exploration.n_chains = 50;
  plan.exploration.samples_per_chain = 40;
  plan.subspace.n_chains = 10;
  plan.subspace.samples_per_chain = 400;
  plan.subspace.burnin_window = 200;
  plan.subspace.burnin_max_cycles = 15;
  return plan;
}

double chi2_quantile_999(double df) {
  // Wilson-Hilferty approximation at the 0.999 level
  double z = 3.0902;
  double t = 1.0 - 2.0 / (9.0 * df) + z * std::sqrt(2.0 / (9.0 * df));
  return df * t * t * t;
}

}  // namespace

TEST_CASE("subspace seed derivation is stable, distinct and uncorrelated") {
  CHECK(derive_subspace_seed(1, 0) != derive_subspace_seed(1, 1));
  CHECK(derive_subspace_seed(1, 5) == derive_subspace_seed(1, 5));
  CHECK(derive_subspace_seed(1, 0) != derive_subspace_seed(2, 0));

  const std::size_t streams = 32, n = 10000;
  std::vector<std::vector<double>> u(streams, std::vector<double>(n));
  for (std::size_t k = 0; k < streams; ++k) {
    Rng rng(derive_subspace_seed(99, k));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) u[k][i] = unif(rng);
  }
  for (std::size_t a = 0; a < streams; ++a)
    for (std::size_t b = a + 1; b < streams; ++b) {
      double ma = 0, mb = 0;
      for (std::size_t i = 0; i < n; ++i) {
        ma += u[a][i];
        mb += u[b][i];
      }
      ma /= double(n);
      mb /= double(n);
      double num = 0, va = 0, vb = 0;
      for (std::size_t i = 0; i < n; ++i) {
        num += (u[a][i] - ma) * (u[b][i] - mb);
        va += (u[a][i] - ma) * (u[a][i] - ma);
        vb += (u[b][i] - mb) * (u[b][i] - mb);
      }
      REQUIRE(std::abs(num / std::sqrt(va * vb)) < 0.05);
    }
}

TEST_CASE("2d pipeline recovers the evidence and the shape") {
  RunPlan plan = small_2d_plan();
  plan.subspace.samples_per_chain = 2000;  // per-leaf harmonic bias ~ 1/N_k
  RunResult r = run_pipeline(plan);

  REQUIRE_FALSE(r.pipeline_failed);
  CHECK(r.tree.leaves().size() == 30);
  REQUIRE(r.samples.size() > 0);

  // evidence
  double total = r.samples.total_integral.value;
  double se = r.samples.total_integral.std_error;
  CHECK(std::abs(total - 1.0) < 5.0 * se);

  // sum of weights equals the total integral
  double sum_w =
      std::accumulate(r.samples.weights.begin(), r.samples.weights.end(), 0.0);
  CHECK(sum_w == doctest::Approx(total).epsilon(1e-9));

  // weighted histogram against the i.i.d. oracle on a 20x20 grid
  auto target = resolve_target("mix2d");
  Rng rng(1001);
  const std::size_t n_iid = 100000;
  const double lo = -6.0, hi = 6.0;
  auto bin_of = [&](double x, double y) -> std::size_t {
    auto bx = std::size_t(std::clamp((x - lo) / (hi - lo) * 20.0, 0.0, 19.0));
    auto by = std::size_t(std::clamp((y - lo) / (hi - lo) * 20.0, 0.0, 19.0));
    return bx * 20 + by;
  };
  std::vector<double> iid_counts(400, 0.0);
  std::vector<double> x(2);
  for (std::size_t i = 0; i < n_iid; ++i) {
    target.iid_oracle(rng, x);
    iid_counts[bin_of(x[0], x[1])] += 1.0;
  }
  Rng rng2(1002);
  const std::size_t n_res = 3000;
  Matrix res = resample_unit_weights(r.samples, n_res, rng2);
  std::vector<double> mcmc_counts(400, 0.0);
  for (std::size_t i = 0; i < n_res; ++i)
    mcmc_counts[bin_of(res(i, 0), res(i, 1))] += 1.0;

  // pool cells with a small expected count, then a two-sample statistic
  double chi2 = 0.0, pooled_a = 0.0, pooled_b = 0.0;
  double cells = 0.0;
  const double ra = double(n_res) / double(n_iid);
  for (std::size_t c = 0; c < 400; ++c) {
    if (iid_counts[c] + mcmc_counts[c] < 20.0) {
      pooled_a += mcmc_counts[c];
      pooled_b += iid_counts[c];
      continue;
    }
    double expect_a = ra * (iid_counts[c] + mcmc_counts[c]) / (1.0 + ra);
    double expect_b = (iid_counts[c] + mcmc_counts[c]) / (1.0 + ra);
    chi2 += (mcmc_counts[c] - expect_a) * (mcmc_counts[c] - expect_a) / expect_a;
    chi2 += (iid_counts[c] - expect_b) * (iid_counts[c] - expect_b) / expect_b;
    cells += 1.0;
  }
  if (pooled_a + pooled_b >= 20.0) {
    double expect_a = ra * (pooled_a + pooled_b) / (1.0 + ra);
    double expect_b = (pooled_a + pooled_b) / (1.0 + ra);
    chi2 += (pooled_a - expect_a) * (pooled_a - expect_a) / expect_a;
    chi2 += (pooled_b - expect_b) * (pooled_b - expect_b) / expect_b;
    cells += 1.0;
  }
  CHECK(chi2 < chi2_quantile_999(cells - 1.0));
}

TEST_CASE("fixed-count results are identical for any worker count or backend") {
  RunPlan plan = small_2d_plan();
  plan.max_subspaces = 8;
  plan.subspace.samples_per_chain = 200;

  plan.executor = "openmp";
  plan.worker_count = 1;
  RunResult w1 = run_pipeline(plan);
  plan.worker_count = 8;
  RunResult w8 = run_pipeline(plan);
  plan.executor = "serial";
  RunResult ser = run_pipeline(plan);

  std::string csv1 = samples_csv_string(w1.samples);
  CHECK(csv1 == samples_csv_string(w8.samples));
  CHECK(csv1 == samples_csv_string(ser.samples));
}

TEST_CASE("single-subspace plan equals a plain multi-chain run") {
  RunPlan plan = small_2d_plan();
  plan.max_subspaces = 1;
  RunResult r = run_pipeline(plan);
  REQUIRE(r.tree.leaves().size() == 1);
  REQUIRE(r.samples.size() == 10 * 400);

  // replicate the baseline path by hand: same seed, same density-ranked inits
  auto target = resolve_target("mix2d");
  ExplorationSampleSet expl = explore(target, plan.exploration, plan.seed);
  std::vector<std::size_t> order(expl.points.rows());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return expl.log_densities[a] > expl.log_densities[b];
  });
  Matrix inits(0, 2);
  for (std::size_t c = 0; c < plan.subspace.n_chains; ++c)
    inits.push_row(expl.points.row(order[c]));
  SubspaceSamples direct =
      run_subspace(target, target.support, plan.subspace,
                   derive_subspace_seed(plan.seed, 0), inits);
  REQUIRE(direct.size() == r.samples.size());
  CHECK(direct.samples.data() == r.samples.samples.data());

  // every weight is I/N
  double w0 = r.samples.total_integral.value / double(r.samples.size());
  for (double w : r.samples.weights) CHECK(w == w0);
}

TEST_CASE("a poisoned region degrades the run without aborting it") {
  // three live clusters; the region x > 9 yields NaN and only the
  // rightmost subspace can ever touch it
  TargetDensity t;
  t.name = "poisoned";
  t.dim = 1;
  t.support = ParameterBox({-10.0}, {10.0});
  t.log_density = [](std::span<const double> x) {
    if (x[0] > 9.0) return std::numeric_limits<double>::quiet_NaN();
    auto bump = [&](double mu, double s) {
      return std::exp(-0.5 * (x[0] - mu) * (x[0] - mu) / (s * s));
    };
    return std::log(bump(-6.0, 0.3) + bump(-2.0, 0.3) + bump(8.5, 0.3) + 1e-300);
  };

  // target resolution goes through the plan; run the stages directly
  ExplorationConfig ecfg;
  ecfg.n_chains = 30;
  ecfg.samples_per_chain = 50;
  ExplorationSampleSet expl = explore(t, ecfg, 3);
  PartitionTree tree = build_tree(expl.points, t.support, 3, 0.0);
  REQUIRE(tree.leaves().size() == 3);

  SubspaceRunConfig scfg;
  scfg.n_chains = 4;
  scfg.samples_per_chain = 300;
  scfg.burnin_window = 100;
  scfg.burnin_max_cycles = 10;

  std::size_t failed = 0, ok = 0;
  for (const Subspace& leaf : tree.leaves()) {
    Matrix inits(0, 1);
    for (std::size_t i = 0; i < expl.points.rows() && inits.rows() < 4; ++i)
      if (leaf.box.contains(expl.points.row(i)))
        inits.push_row(expl.points.row(i));
    try {
      SubspaceSamples s =
          run_subspace(t, leaf.box, scfg, derive_subspace_seed(3, leaf.index),
                       inits);
      integrate_subspace(s, leaf);
      ++ok;
    } catch (const std::exception&) {
      ++failed;
    }
  }
  CHECK(failed == 1);
  CHECK(ok == 2);
}

TEST_CASE("all-failing subspaces mark the pipeline as failed") {
  RunPlan plan = small_2d_plan();
  plan.max_subspaces = 4;
  plan.subspace.samples_per_chain = 3;  // below the integrator minimum
  plan.subspace.n_chains = 2;
  RunResult r = run_pipeline(plan);
  CHECK(r.pipeline_failed);
  CHECK(r.degraded);
  CHECK(r.samples.size() == 0);
  CHECK(r.warnings.size() >= 4);
  for (const SubspaceReport& s : r.subspaces) CHECK(s.failed);
}

TEST_CASE("timing bookkeeping covers every subspace") {
  RunPlan plan = small_2d_plan();
  plan.max_subspaces = 6;
  plan.subspace.samples_per_chain = 100;
  RunResult r = run_pipeline(plan);
  RunTiming t = r.timing();
  double max_cpu = 0.0;
  for (const SubspaceReport& s : r.subspaces) {
    CHECK(t.max_wall >= s.wall_seconds);
    CHECK(s.wall_seconds >= s.sampling_wall_seconds);
    max_cpu = std::max(max_cpu, s.cpu_seconds);
  }
  CHECK(t.sum_cpu >= max_cpu);
  CHECK(t.n_samples == double(r.samples.size()));
  CHECK(r.exploration_seconds > 0.0);
  CHECK(r.tree_seconds >= 0.0);
}

TEST_CASE("worker count resolution honors the environment override") {
  RunPlan plan;
  plan.target_spec = "mix2d";
  plan.worker_count = 3;
  CHECK(resolve_worker_count(plan) == 3);
  setenv("PARTITION_MCMC_WORKERS", "5", 1);
  CHECK(resolve_worker_count(plan) == 5);
  unsetenv("PARTITION_MCMC_WORKERS");
  CHECK(resolve_worker_count(plan) == 3);
  plan.worker_count = 0;
  CHECK(resolve_worker_count(plan) >= 1);
}

TEST_CASE("wall-clock mode is flagged as non-reproducible") {
  RunPlan plan = small_2d_plan();
  plan.max_subspaces = 2;
  plan.subspace.mode = SubspaceRunConfig::Mode::wall_clock;
  plan.subspace.wall_clock_seconds = 0.05;
  plan.subspace.wallclock_max_samples_per_chain = 200;
  RunResult r = run_pipeline(plan);
  bool flagged = false;
  for (const std::string& w : r.warnings)
    flagged = flagged || w.find("wall-clock") != std::string::npos;
  CHECK(flagged);
}
