#pragma once

#include <iosfwd>
#include <vector>

#include "pmc/orchestrator.hpp"

namespace pmc {

/// Grid of (subspace count, wall-clock budget, repetition) pipeline runs.
struct BenchmarkGrid {
  std::vector<std::size_t> subspace_counts = {1, 2, 4, 8, 16, 32};
  std::vector<double> budgets_seconds = {3.0, 7.0, 11.0, 15.0};
  std::size_t repetitions = 3;
  std::uint64_t seed = 1;
  /// Per-run template; target, exploration and chain settings come from
  /// here while the grid supplies max_subspaces and the wall-clock budget.
  RunPlan base;

  void validate() const {
    if (subspace_counts.empty() || budgets_seconds.empty() || repetitions < 1)
      throw std::invalid_argument("benchmark grid: all lists must be non-empty");
    for (std::size_t s : subspace_counts)
      if (s < 1) throw std::invalid_argument("benchmark grid: S must be >= 1");
    for (double b : budgets_seconds)
      if (!(b > 0.0))
        throw std::invalid_argument("benchmark grid: budgets must be positive");
  }
};

struct BenchmarkRow {
  std::size_t subspaces = 0;
  double budget_seconds = 0.0;
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  std::size_t n_samples = 0;
  double max_subspace_wall_seconds = 0.0;
  double sum_subspace_cpu_seconds = 0.0;
  double integral = 0.0;
  double integral_std_error = 0.0;
  bool degraded = false;
  double mean_neff_fraction = 0.0;
  double std_neff_fraction = 0.0;
  // versus the S=1 run with the same budget and repetition; NaN without one
  double sampling_rate = 0.0;
  double per_chain_rate = 0.0;
};

/// Runs the grid (S=1 rows first so they can serve as rate baselines) and
/// reports one row per run. `progress` gets a line per finished run.
std::vector<BenchmarkRow> run_benchmark_grid(const BenchmarkGrid& grid,
                                             std::ostream* progress = nullptr);

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows);

/// Default per-run template for the 9-D benchmark target.
RunPlan default_benchmark_plan();

}  // namespace pmc
