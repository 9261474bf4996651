#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pmc/integration.hpp"
#include "pmc/mh.hpp"
#include "pmc/rng.hpp"
#include "pmc/types.hpp"

namespace pmc {

struct EmptyResultError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Final reweighted sample set; weights are unnormalized and sum to the
/// total evidence estimate.
struct WeightedSampleSet {
  Matrix samples;
  std::vector<double> weights;
  std::vector<double> log_densities;
  std::vector<std::uint32_t> subspace_ids;
  std::vector<std::uint32_t> chain_ids;
  IntegralEstimate total_integral;

  std::size_t size() const { return samples.rows(); }
};

/// Assigns every sample of subspace k the weight I_k / N_k and concatenates
/// the per-subspace sets in the given order.
WeightedSampleSet stitch(
    const std::vector<std::pair<const SubspaceSamples*, IntegralEstimate>>&
        per_subspace);

/// Systematic (ordered) resampling to unit weights: one uniform offset, a
/// fixed stride of sum(w)/n_out, and a cumulative-weight walk, so the
/// expected multiplicity of sample i is n_out * w_i / sum(w).
Matrix resample_unit_weights(const WeightedSampleSet& ws, std::size_t n_out,
                             Rng& rng);

}  // namespace pmc
