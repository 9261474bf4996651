#include "pmc/mh.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <limits>

namespace pmc {

double thread_cpu_seconds() {
#if defined(__linux__)
  timespec ts;
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return double(ts.tv_sec) + 1e-9 * double(ts.tv_nsec);
#else
  return double(std::clock()) / double(CLOCKS_PER_SEC);
#endif
}

bool mh_step(ChainState& state, const TargetDensity& target,
             const ParameterBox& box) {
  const std::size_t m = state.position.size();
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> prop(m);
  for (std::size_t i = 0; i < m; ++i)
    prop[i] = state.position[i] + state.proposal_scale[i] * gauss(state.rng);
  ++state.proposed;

  if (!box.contains(prop)) return false;  // f = 0 outside the subspace

  double lf = target.log_density(prop);
  if (std::isnan(lf)) throw CorruptTargetError("target returned NaN");

  bool accept = lf >= state.log_density;
  if (!accept) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    accept = std::log(unif(state.rng)) < lf - state.log_density;
  }
  if (accept) {
    state.position = prop;
    state.log_density = lf;
    ++state.accepted;
  }
  return accept;
}

std::vector<ChainState> init_chains(const TargetDensity& target,
                                    const ParameterBox& box,
                                    const SubspaceRunConfig& cfg,
                                    std::uint64_t seed,
                                    const Matrix& init_points) {
  cfg.validate();
  const std::size_t m = box.dim();
  std::vector<ChainState> chains;
  chains.reserve(cfg.n_chains);
  for (std::size_t c = 0; c < cfg.n_chains; ++c) {
    ChainState st;
    st.rng = make_rng(derive_seed(seed, StreamKind::chain, c));
    st.proposal_scale.resize(m);
    for (std::size_t i = 0; i < m; ++i) st.proposal_scale[i] = 0.05 * box.side(i);

    bool ok = false;
    if (c < init_points.rows()) {
      st.position.assign(init_points.row(c).begin(), init_points.row(c).end());
      st.log_density = target.log_density(st.position);
      ok = std::isfinite(st.log_density) && box.contains(st.position);
    }
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
      st.position.resize(m);
      for (std::size_t i = 0; i < m; ++i)
        st.position[i] = box.lower[i] + unif(st.rng) * box.side(i);
      st.log_density = target.log_density(st.position);
      ok = std::isfinite(st.log_density);
    }
    if (!ok)
      throw SubspaceInitError("no finite-density start found in subspace box");
    chains.push_back(std::move(st));
  }
  return chains;
}

double split_rhat(const std::vector<std::vector<double>>& series) {
  // Halve every series, then B/W over the resulting sequences.
  std::vector<std::pair<double, double>> stats;  // (mean, variance)
  std::size_t half = series.empty() ? 0 : series[0].size() / 2;
  if (half < 2) return std::numeric_limits<double>::infinity();
  for (const auto& s : series) {
    for (int part = 0; part < 2; ++part) {
      const double* b = s.data() + std::size_t(part) * half;
      double mean = 0.0;
      for (std::size_t i = 0; i < half; ++i) mean += b[i];
      mean /= double(half);
      double var = 0.0;
      for (std::size_t i = 0; i < half; ++i) var += (b[i] - mean) * (b[i] - mean);
      var /= double(half - 1);
      stats.emplace_back(mean, var);
    }
  }
  const double mcount = double(stats.size());
  const double n = double(half);
  double grand = 0.0, w = 0.0;
  for (auto& [mu, var] : stats) {
    grand += mu;
    w += var;
  }
  grand /= mcount;
  w /= mcount;
  double b = 0.0;
  for (auto& [mu, var] : stats) b += (mu - grand) * (mu - grand);
  b *= n / (mcount - 1.0);
  if (w <= 1e-300) return b <= 1e-300 ? 1.0 : std::numeric_limits<double>::infinity();
  double vhat = (n - 1.0) / n * w + b / n;
  return std::sqrt(vhat / w);
}

bool tune_and_burnin(std::vector<ChainState>& chains,
                     const TargetDensity& target, const ParameterBox& box,
                     const SubspaceRunConfig& cfg) {
  if (chains.empty()) throw std::invalid_argument("tune_and_burnin: no chains");
  const std::size_t m = box.dim();
  const std::size_t window = cfg.burnin_window;

  std::vector<double> cycle_accept(chains.size(), 0.0);
  // window series per chain per dimension
  std::vector<std::vector<std::vector<double>>> win(
      m, std::vector<std::vector<double>>(chains.size(),
                                          std::vector<double>(window)));

  for (std::size_t cycle = 0; cycle < cfg.burnin_max_cycles; ++cycle) {
    if (cycle > 0) {
      for (std::size_t c = 0; c < chains.size(); ++c) {
        double factor =
            std::exp(cfg.adapt_kappa * (cycle_accept[c] - cfg.adapt_center));
        for (double& s : chains[c].proposal_scale) s *= factor;
      }
    }
    double pooled = 0.0;
    for (std::size_t c = 0; c < chains.size(); ++c) {
      std::uint64_t acc0 = chains[c].accepted, prop0 = chains[c].proposed;
      for (std::size_t s = 0; s < window; ++s) {
        mh_step(chains[c], target, box);
        for (std::size_t d = 0; d < m; ++d)
          win[d][c][s] = chains[c].position[d];
      }
      cycle_accept[c] = double(chains[c].accepted - acc0) /
                        double(chains[c].proposed - prop0);
      pooled += cycle_accept[c];
    }
    pooled /= double(chains.size());

    // gate on the pooled rate; individual chains keep adapting on their own
    if (pooled < cfg.target_accept_lo || pooled > cfg.target_accept_hi)
      continue;

    if (chains.size() == 1) return true;  // R-hat undefined for one chain
    bool rhat_ok = true;
    for (std::size_t d = 0; d < m && rhat_ok; ++d)
      rhat_ok = split_rhat(win[d]) < cfg.rhat_threshold;
    if (rhat_ok) return true;
  }
  return false;
}

SubspaceSamples sample_subspace(std::vector<ChainState>& chains,
                                const TargetDensity& target,
                                const ParameterBox& box,
                                const SubspaceRunConfig& cfg) {
  SubspaceSamples out;
  const std::size_t m = box.dim();

  if (cfg.mode == SubspaceRunConfig::Mode::fixed_count) {
    const std::size_t n = cfg.samples_per_chain;
    out.samples = Matrix(chains.size() * n, m);
    out.log_densities.resize(chains.size() * n);
    out.chain_ids.resize(chains.size() * n);
    std::size_t row = 0;
    for (std::size_t c = 0; c < chains.size(); ++c) {
      for (std::size_t s = 0; s < n; ++s, ++row) {
        mh_step(chains[c], target, box);
        std::copy(chains[c].position.begin(), chains[c].position.end(),
                  out.samples.row(row).begin());
        out.log_densities[row] = chains[c].log_density;
        out.chain_ids[row] = static_cast<std::uint32_t>(c);
      }
    }
    return out;
  }

  // Wall-clock mode: chains advance in small interleaved blocks until the
  // budget elapses. Sample counts depend on machine speed; not reproducible.
  const std::size_t cap = cfg.wallclock_max_samples_per_chain;
  constexpr std::size_t kBlock = 64;
  std::vector<Matrix> per_chain(chains.size());
  std::vector<std::vector<double>> per_chain_logf(chains.size());
  for (auto& pm : per_chain) pm = Matrix(0, m);
  auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };
  bool budget_left = cfg.wall_clock_seconds > 0.0;
  while (budget_left) {
    for (std::size_t c = 0; c < chains.size(); ++c) {
      std::size_t have = per_chain[c].rows();
      if (cap > 0 && have >= cap) continue;
      std::size_t take = kBlock;
      if (cap > 0) take = std::min(take, cap - have);
      for (std::size_t s = 0; s < take; ++s) {
        mh_step(chains[c], target, box);
        per_chain[c].push_row(chains[c].position);
        per_chain_logf[c].push_back(chains[c].log_density);
      }
    }
    bool all_capped = cap > 0;
    if (cap > 0)
      for (const auto& pm : per_chain) all_capped = all_capped && pm.rows() >= cap;
    budget_left = !all_capped && elapsed() < cfg.wall_clock_seconds;
  }
  out.samples = Matrix(0, m);
  for (std::size_t c = 0; c < chains.size(); ++c) {
    for (std::size_t s = 0; s < per_chain[c].rows(); ++s) {
      out.samples.push_row(per_chain[c].row(s));
      out.log_densities.push_back(per_chain_logf[c][s]);
      out.chain_ids.push_back(static_cast<std::uint32_t>(c));
    }
  }
  return out;
}

SubspaceSamples run_subspace(const TargetDensity& target,
                             const ParameterBox& box,
                             const SubspaceRunConfig& cfg, std::uint64_t seed,
                             const Matrix& init_points) {
  auto wall0 = std::chrono::steady_clock::now();
  double cpu0 = thread_cpu_seconds();
  auto chains = init_chains(target, box, cfg, seed, init_points);
  bool converged = tune_and_burnin(chains, target, box, cfg);
  SubspaceSamples out = sample_subspace(chains, target, box, cfg);
  out.converged = converged;
  out.cpu_seconds = thread_cpu_seconds() - cpu0;
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0)
          .count();
  return out;
}

}  // namespace pmc
