#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pmc/target.hpp"
#include "pmc/types.hpp"

namespace pmc {

struct CorruptTargetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SubspaceInitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// State of one random-walk Metropolis-Hastings chain restricted to a box.
struct ChainState {
  std::vector<double> position;
  double log_density = 0.0;
  std::vector<double> proposal_scale;  // per-axis std dev
  Rng rng;
  std::uint64_t accepted = 0;
  std::uint64_t proposed = 0;
};

struct SubspaceRunConfig {
  std::size_t n_chains = 10;

  enum class Mode { fixed_count, wall_clock };
  Mode mode = Mode::fixed_count;
  std::size_t samples_per_chain = 1000;  // fixed-count mode
  double wall_clock_seconds = 0.0;       // wall-clock mode
  /// Memory guard for wall-clock mode on cheap targets; 0 disables.
  std::size_t wallclock_max_samples_per_chain = 10000;

  std::size_t burnin_max_cycles = 40;
  /// Steps per tuning cycle; split R-hat needs windows much longer than the
  /// within-mode autocorrelation time to resolve the 1.1 threshold.
  std::size_t burnin_window = 400;
  double target_accept_lo = 0.2;
  double target_accept_hi = 0.45;
  double rhat_threshold = 1.1;
  /// Multiplicative scale update: scale *= exp(kappa * (acc - center)).
  double adapt_kappa = 1.0;
  double adapt_center = 0.3;

  void validate() const {
    if (n_chains < 1)
      throw std::invalid_argument("SubspaceRunConfig: n_chains must be >= 1");
    if (burnin_window < 2 || rhat_threshold <= 0.0)
      throw std::invalid_argument("SubspaceRunConfig: invalid thresholds");
    if (!(target_accept_lo > 0.0 && target_accept_lo < target_accept_hi &&
          target_accept_hi < 1.0))
      throw std::invalid_argument("SubspaceRunConfig: bad acceptance window");
    if (mode == Mode::wall_clock && wall_clock_seconds < 0.0)
      throw std::invalid_argument("SubspaceRunConfig: negative wall clock");
  }
};

struct SubspaceSamples {
  std::size_t subspace_index = 0;
  Matrix samples;
  std::vector<double> log_densities;
  std::vector<std::uint32_t> chain_ids;
  double wall_seconds = 0.0;  // burn-in + sampling; integration added by the caller
  double cpu_seconds = 0.0;
  bool converged = false;

  std::size_t size() const { return samples.rows(); }
};

/// One Metropolis step with an axis-wise Gaussian proposal. Proposals
/// outside the box are auto-rejected (density zero outside), which keeps
/// the restricted stationary distribution intact. Returns true when the
/// move was accepted.
bool mh_step(ChainState& state, const TargetDensity& target,
             const ParameterBox& box);

/// Builds n_chains chains seeded from `seed`, started at the provided
/// points (padded with uniform draws in the box when there are fewer
/// points than chains). Throws SubspaceInitError when no finite-density
/// start can be found.
std::vector<ChainState> init_chains(const TargetDensity& target,
                                    const ParameterBox& box,
                                    const SubspaceRunConfig& cfg,
                                    std::uint64_t seed,
                                    const Matrix& init_points);

/// Adapt-and-check cycles: each cycle runs a fixed window per chain, then
/// either stops (acceptance inside the target window and split R-hat below
/// threshold on every dimension) or rescales the proposals and repeats.
/// With a single chain R-hat is undefined and the acceptance window alone
/// decides. Tuning samples are discarded.
bool tune_and_burnin(std::vector<ChainState>& chains,
                     const TargetDensity& target, const ParameterBox& box,
                     const SubspaceRunConfig& cfg);

/// Runs the tuned chains. Fixed-count mode emits exactly samples_per_chain
/// per chain; wall-clock mode interleaves chains in small blocks until the
/// budget (or the per-chain cap) is reached.
SubspaceSamples sample_subspace(std::vector<ChainState>& chains,
                                const TargetDensity& target,
                                const ParameterBox& box,
                                const SubspaceRunConfig& cfg);

/// init + tune + sample with wall/cpu timing of the whole task.
SubspaceSamples run_subspace(const TargetDensity& target,
                             const ParameterBox& box,
                             const SubspaceRunConfig& cfg, std::uint64_t seed,
                             const Matrix& init_points);

/// Split R-hat across chains for one dimension: every series is halved,
/// then the classic between/within variance ratio is returned.
double split_rhat(const std::vector<std::vector<double>>& series);

/// Current thread's CPU time in seconds.
double thread_cpu_seconds();

}  // namespace pmc
