#include "pmc/stitching.hpp"

#include <cmath>

namespace pmc {

WeightedSampleSet stitch(
    const std::vector<std::pair<const SubspaceSamples*, IntegralEstimate>>&
        per_subspace) {
  WeightedSampleSet out;
  std::vector<IntegralEstimate> estimates;
  std::size_t total = 0;
  for (const auto& [samples, integral] : per_subspace) total += samples->size();
  if (per_subspace.empty() || total == 0)
    throw EmptyResultError("stitch: no subspace produced samples");

  std::size_t dim = per_subspace.front().first->samples.cols();
  out.samples = Matrix(total, dim);
  out.weights.reserve(total);
  out.log_densities.reserve(total);
  out.subspace_ids.reserve(total);
  out.chain_ids.reserve(total);

  std::size_t row = 0;
  for (const auto& [samples, integral] : per_subspace) {
    if (samples->size() == 0)
      throw std::invalid_argument("stitch: subspace with zero samples included");
    estimates.push_back(integral);
    const double w = integral.value / double(samples->size());
    for (std::size_t i = 0; i < samples->size(); ++i, ++row) {
      std::copy(samples->samples.row(i).begin(), samples->samples.row(i).end(),
                out.samples.row(row).begin());
      out.weights.push_back(w);
      out.log_densities.push_back(samples->log_densities[i]);
      out.subspace_ids.push_back(
          static_cast<std::uint32_t>(samples->subspace_index));
      out.chain_ids.push_back(samples->chain_ids[i]);
    }
  }
  out.total_integral = total_integral(estimates);
  return out;
}

Matrix resample_unit_weights(const WeightedSampleSet& ws, std::size_t n_out,
                             Rng& rng) {
  if (n_out < 1)
    throw std::invalid_argument("resample_unit_weights: n_out must be >= 1");
  double total = 0.0;
  for (double w : ws.weights) total += w;
  if (!(total > 0.0))
    throw std::invalid_argument("resample_unit_weights: zero total weight");

  const double stride = total / double(n_out);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng) * stride;

  Matrix out(n_out, ws.samples.cols());
  std::size_t i = 0;
  double cum = ws.weights.empty() ? 0.0 : ws.weights[0];
  for (std::size_t j = 0; j < n_out; ++j) {
    double point = u + double(j) * stride;
    while (point >= cum && i + 1 < ws.size()) {
      ++i;
      cum += ws.weights[i];
    }
    std::copy(ws.samples.row(i).begin(), ws.samples.row(i).end(),
              out.row(j).begin());
  }
  return out;
}

}  // namespace pmc
