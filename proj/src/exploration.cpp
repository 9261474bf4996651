#include "pmc/exploration.hpp"

#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pmc {

namespace {

struct ChainOutput {
  Matrix points;
  std::vector<double> log_densities;
  std::string error;
};

ChainOutput run_exploration_chain(const TargetDensity& target,
                                  const ExplorationConfig& cfg,
                                  std::size_t chain_index,
                                  std::uint64_t chain_seed) {
  ChainOutput out;
  const std::size_t m = target.dim;
  Rng rng = make_rng(chain_seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<double> pos(m);
  double logf = -std::numeric_limits<double>::infinity();
  bool ok = false;
  if (cfg.init_strategy == ExplorationConfig::InitStrategy::user_points) {
    auto row = cfg.user_starts.row(chain_index % cfg.user_starts.rows());
    pos.assign(row.begin(), row.end());
    if (!target.support.contains(pos)) {
      out.error = "user starting point outside the support box";
      return out;
    }
    logf = target.log_density(pos);
    ok = std::isfinite(logf);
  }
  for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
    for (std::size_t i = 0; i < m; ++i)
      pos[i] = target.support.lower[i] + unif(rng) * target.support.side(i);
    logf = target.log_density(pos);
    ok = std::isfinite(logf);
  }
  if (!ok) {
    out.error = "no finite-density starting point found";
    return out;
  }

  double scale = 0.05 * target.support.min_side();
  std::vector<double> prop(m);
  auto step = [&](bool& accepted) {
    for (std::size_t i = 0; i < m; ++i) prop[i] = pos[i] + scale * gauss(rng);
    accepted = false;
    if (target.support.contains(prop)) {
      double lf = target.log_density(prop);
      if (std::isfinite(lf) &&
          (lf >= logf || std::log(unif(rng)) < lf - logf)) {
        pos = prop;
        logf = lf;
        accepted = true;
      }
    }
  };

  // Calibration prefix: run a few steps, then rescale the proposal once.
  std::size_t prefix = static_cast<std::size_t>(
      cfg.proposal_init_fraction * double(cfg.samples_per_chain));
  if (prefix > 0) {
    std::size_t accepted_count = 0;
    for (std::size_t s = 0; s < prefix; ++s) {
      bool acc;
      step(acc);
      accepted_count += acc ? 1 : 0;
    }
    double rate = double(accepted_count) / double(prefix);
    if (rate > 0.5)
      scale *= 2.0;
    else if (rate < 0.1)
      scale *= 0.5;
  }

  out.points = Matrix(cfg.samples_per_chain, m);
  out.log_densities.resize(cfg.samples_per_chain);
  for (std::size_t s = 0; s < cfg.samples_per_chain; ++s) {
    bool acc;
    step(acc);
    std::copy(pos.begin(), pos.end(), out.points.row(s).begin());
    out.log_densities[s] = logf;
  }
  return out;
}

}  // namespace

ExplorationSampleSet explore(const TargetDensity& target,
                             const ExplorationConfig& cfg, std::uint64_t seed,
                             int n_threads) {
  cfg.validate();
  const std::size_t n = cfg.n_chains;
  std::vector<ChainOutput> chains(n);

#ifdef _OPENMP
  if (n_threads <= 0) n_threads = omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(n_threads)
#endif
  for (std::size_t c = 0; c < n; ++c)
    chains[c] = run_exploration_chain(
        target, cfg, c, derive_seed(seed, StreamKind::exploration, c));

  ExplorationSampleSet set;
  set.points = Matrix(0, target.dim);
  for (std::size_t c = 0; c < n; ++c) {
    if (!chains[c].error.empty())
      throw InitializationFailure("exploration chain " + std::to_string(c) +
                                  ": " + chains[c].error);
    for (std::size_t s = 0; s < chains[c].points.rows(); ++s) {
      set.points.push_row(chains[c].points.row(s));
      set.log_densities.push_back(chains[c].log_densities[s]);
      set.chain_ids.push_back(static_cast<std::uint32_t>(c));
    }
  }
  return set;
}

}  // namespace pmc
