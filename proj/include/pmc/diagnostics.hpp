#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pmc/types.hpp"

namespace pmc {

/// Autocovariance c(0..max_lag) with the 1/(N-tau) normalization; the mean
/// of the full series is subtracted at every lag.
std::vector<double> autocovariance(std::span<const double> series,
                                   std::size_t max_lag);

/// Integrated autocorrelation time from normalized autocorrelations
/// (rho[0] must be 1). Pair sums are truncated before the first
/// non-positive one and forced monotone non-increasing by a running
/// minimum; the result is clipped to >= 1.
double integrated_autocorr_time(std::span<const double> rho);

/// Same estimator evaluated lazily on a series: autocovariances are
/// computed lag by lag until the Geyer cutoff fires, so long series with
/// short memory stay cheap. max_lag == 0 means N/2.
double integrated_autocorr_time_series(std::span<const double> series,
                                       std::size_t max_lag = 0);

struct EssReport {
  std::vector<double> tau;      // per dimension, clipped to >= 1
  std::vector<double> n_eff;    // per dimension
  std::vector<bool> flagged;    // constant dimensions, excluded from the mean
  double n_eff_mean = 0.0;      // across non-flagged dimensions
  double n_eff_std = 0.0;
  std::size_t n_samples = 0;
};

/// Effective sample size per dimension of one contiguous series matrix.
EssReport ess_report(const Matrix& samples, std::size_t max_lag = 0);

/// Variant that computes tau per chain and sums the per-chain effective
/// sizes, for callers whose rows interleave several chains.
EssReport ess_report_per_chain(const Matrix& samples,
                               const std::vector<std::uint32_t>& chain_ids,
                               std::size_t max_lag = 0);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test on (optionally weighted) 1-D
/// samples. Weights are normalized within each sample before the
/// sup-difference; the p-value uses the asymptotic Kolmogorov distribution
/// at the effective size n_a*n_b/(n_a+n_b) supplied by the caller.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> wa,
                       std::span<const double> b, std::span<const double> wb,
                       double n_eff_a, double n_eff_b);

/// Unit-weight convenience overload.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b,
                       double n_eff_a, double n_eff_b);

/// Upper tail of the asymptotic Kolmogorov distribution, Q(lambda).
double kolmogorov_q(double lambda);

/// Per-run inputs for the throughput ratios; exploration and tree
/// construction time are excluded by definition.
struct RunTiming {
  double n_samples = 0.0;  // total retained samples
  double max_wall = 0.0;   // slowest subspace wall-clock (sampling+integration)
  double sum_cpu = 0.0;    // total CPU time over subspaces
};

struct RateReport {
  double sampling_rate = 0.0;   // (N_k / max dt_k) * (dt_0 / N_0)
  double per_chain_rate = 0.0;  // (N_k / sum tau_i) * (tau_0 / N_0)
  RunTiming baseline;
  RunTiming partitioned;
};

RateReport rate_report(const RunTiming& baseline, const RunTiming& partitioned);

}  // namespace pmc
