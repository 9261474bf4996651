#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pmc/target.hpp"
#include "pmc/types.hpp"

namespace pmc {

struct ExplorationConfig {
  std::size_t n_chains = 25;
  std::size_t samples_per_chain = 20;
  /// Fraction of each chain's budget spent calibrating its proposal scale;
  /// those steps are discarded.
  double proposal_init_fraction = 0.1;

  enum class InitStrategy { uniform_in_box, user_points };
  InitStrategy init_strategy = InitStrategy::uniform_in_box;
  /// Starting points for user_points; chain c starts at row c mod rows.
  Matrix user_starts;

  std::size_t n_exp() const { return n_chains * samples_per_chain; }

  void validate() const {
    if (n_chains < 1 || samples_per_chain < 1)
      throw std::invalid_argument("ExplorationConfig: counts must be >= 1");
    if (!(proposal_init_fraction > 0.0 && proposal_init_fraction < 1.0))
      throw std::invalid_argument(
          "ExplorationConfig: proposal_init_fraction must be in (0,1)");
    if (init_strategy == InitStrategy::user_points && user_starts.rows() == 0)
      throw std::invalid_argument(
          "ExplorationConfig: user_points needs at least one starting point");
  }
};

struct ExplorationSampleSet {
  Matrix points;                       // n_exp x m
  std::vector<double> log_densities;   // n_exp
  std::vector<std::uint32_t> chain_ids;
};

struct InitializationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Runs independent short Metropolis-Hastings chains from uniformly drawn
/// starting points with no convergence requirement; a short prefix per
/// chain sets the proposal scale and is discarded. Deterministic in
/// (seed, cfg) regardless of thread count.
ExplorationSampleSet explore(const TargetDensity& target,
                             const ExplorationConfig& cfg, std::uint64_t seed,
                             int n_threads = 0);

}  // namespace pmc
