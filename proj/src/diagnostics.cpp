#include "pmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace pmc {

namespace {

double series_mean(std::span<const double> s) {
  return std::accumulate(s.begin(), s.end(), 0.0) / double(s.size());
}

double autocov_at(std::span<const double> s, double mean, std::size_t tau) {
  const std::size_t n = s.size();
  double acc = 0.0;
  for (std::size_t i = 0; i + tau < n; ++i)
    acc += (s[i] - mean) * (s[i + tau] - mean);
  return acc / double(n - tau);
}

}  // namespace

std::vector<double> autocovariance(std::span<const double> series,
                                   std::size_t max_lag) {
  const std::size_t n = series.size();
  if (n < 2) throw std::invalid_argument("autocovariance: need N >= 2");
  if (max_lag >= n)
    throw std::invalid_argument("autocovariance: max_lag must be < N");
  double mean = series_mean(series);
  std::vector<double> c(max_lag + 1);
  for (std::size_t tau = 0; tau <= max_lag; ++tau)
    c[tau] = autocov_at(series, mean, tau);
  return c;
}

double integrated_autocorr_time(std::span<const double> rho) {
  if (rho.empty()) return 1.0;
  double pair_floor = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t m = 0; 2 * m < rho.size(); ++m) {
    double gamma = rho[2 * m];
    if (2 * m + 1 < rho.size()) gamma += rho[2 * m + 1];
    if (gamma <= 0.0) break;                  // initial positive sequence
    pair_floor = std::min(pair_floor, gamma); // initial monotone sequence
    sum += pair_floor;
  }
  return std::max(1.0, 2.0 * sum - 1.0);
}

double integrated_autocorr_time_series(std::span<const double> series,
                                       std::size_t max_lag) {
  const std::size_t n = series.size();
  if (n < 2) return 1.0;
  if (max_lag == 0) max_lag = n / 2;
  max_lag = std::min(max_lag, n - 1);

  double mean = series_mean(series);
  double c0 = autocov_at(series, mean, 0);
  if (c0 <= 0.0) return 1.0;  // constant series: undefined, treated as iid

  double pair_floor = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t m = 0; 2 * m <= max_lag; ++m) {
    double gamma = (m == 0) ? 1.0 : autocov_at(series, mean, 2 * m) / c0;
    if (2 * m + 1 <= max_lag)
      gamma += autocov_at(series, mean, 2 * m + 1) / c0;
    if (gamma <= 0.0) break;
    pair_floor = std::min(pair_floor, gamma);
    sum += pair_floor;
  }
  return std::max(1.0, 2.0 * sum - 1.0);
}

namespace {

EssReport finalize_report(EssReport rep) {
  double mean = 0.0, mean_sq = 0.0;
  std::size_t used = 0;
  for (std::size_t d = 0; d < rep.n_eff.size(); ++d) {
    if (rep.flagged[d]) continue;
    mean += rep.n_eff[d];
    mean_sq += rep.n_eff[d] * rep.n_eff[d];
    ++used;
  }
  if (used > 0) {
    mean /= double(used);
    rep.n_eff_mean = mean;
    rep.n_eff_std = std::sqrt(std::max(0.0, mean_sq / double(used) - mean * mean));
  }
  return rep;
}

}  // namespace

EssReport ess_report(const Matrix& samples, std::size_t max_lag) {
  const std::size_t n = samples.rows();
  if (n < 10) throw std::invalid_argument("ess_report: need N >= 10");
  EssReport rep;
  rep.n_samples = n;
  for (std::size_t d = 0; d < samples.cols(); ++d) {
    std::vector<double> col = samples.column(d);
    double mean = series_mean(col);
    double c0 = autocov_at(col, mean, 0);
    if (c0 <= 0.0) {
      rep.tau.push_back(1.0);
      rep.n_eff.push_back(double(n));
      rep.flagged.push_back(true);
      continue;
    }
    double tau = integrated_autocorr_time_series(col, max_lag);
    rep.tau.push_back(tau);
    rep.n_eff.push_back(double(n) / tau);
    rep.flagged.push_back(false);
  }
  return finalize_report(std::move(rep));
}

EssReport ess_report_per_chain(const Matrix& samples,
                               const std::vector<std::uint32_t>& chain_ids,
                               std::size_t max_lag) {
  const std::size_t n = samples.rows();
  if (n < 10) throw std::invalid_argument("ess_report: need N >= 10");
  if (chain_ids.size() != n)
    throw std::invalid_argument("ess_report: chain id count mismatch");

  std::map<std::uint32_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[chain_ids[i]].push_back(i);

  EssReport rep;
  rep.n_samples = n;
  for (std::size_t d = 0; d < samples.cols(); ++d) {
    double n_eff = 0.0;
    bool any = false;
    for (const auto& [id, rows] : groups) {
      if (rows.size() < 10) continue;
      std::vector<double> col(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) col[i] = samples(rows[i], d);
      double mean = series_mean(col);
      if (autocov_at(col, mean, 0) <= 0.0) continue;
      n_eff += double(rows.size()) /
               integrated_autocorr_time_series(col, max_lag);
      any = true;
    }
    rep.flagged.push_back(!any);
    rep.n_eff.push_back(any ? n_eff : double(n));
    rep.tau.push_back(any ? double(n) / n_eff : 1.0);
  }
  return finalize_report(std::move(rep));
}

double kolmogorov_q(double lambda) {
  if (lambda < 1e-8) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    double term = std::exp(-2.0 * double(j) * double(j) * lambda * lambda);
    sum += sign * term;
    if (term < 1e-10) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> wa,
                       std::span<const double> b, std::span<const double> wb,
                       double n_eff_a, double n_eff_b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("ks_two_sample: empty sample");
  if (!(n_eff_a > 0.0) || !(n_eff_b > 0.0))
    throw std::invalid_argument("ks_two_sample: effective sizes must be > 0");
  if (!wa.empty() && wa.size() != a.size())
    throw std::invalid_argument("ks_two_sample: weight length mismatch");
  if (!wb.empty() && wb.size() != b.size())
    throw std::invalid_argument("ks_two_sample: weight length mismatch");

  auto sorted_order = [](std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    return idx;
  };
  std::vector<std::size_t> ia = sorted_order(a), ib = sorted_order(b);
  double ta = wa.empty() ? double(a.size())
                         : std::accumulate(wa.begin(), wa.end(), 0.0);
  double tb = wb.empty() ? double(b.size())
                         : std::accumulate(wb.begin(), wb.end(), 0.0);
  if (!(ta > 0.0) || !(tb > 0.0))
    throw std::invalid_argument("ks_two_sample: zero total weight");

  // Merged sweep over the pooled order; the sup is attained right after
  // processing all mass at a distinct value.
  double fa = 0.0, fb = 0.0, d = 0.0;
  std::size_t pa = 0, pb = 0;
  while (pa < ia.size() || pb < ib.size()) {
    double va = pa < ia.size() ? a[ia[pa]]
                               : std::numeric_limits<double>::infinity();
    double vb = pb < ib.size() ? b[ib[pb]]
                               : std::numeric_limits<double>::infinity();
    double v = std::min(va, vb);
    while (pa < ia.size() && a[ia[pa]] == v) {
      fa += (wa.empty() ? 1.0 : wa[ia[pa]]) / ta;
      ++pa;
    }
    while (pb < ib.size() && b[ib[pb]] == v) {
      fb += (wb.empty() ? 1.0 : wb[ib[pb]]) / tb;
      ++pb;
    }
    d = std::max(d, std::abs(fa - fb));
  }

  KsResult r;
  r.statistic = d;
  double n_eff = n_eff_a * n_eff_b / (n_eff_a + n_eff_b);
  r.p_value = kolmogorov_q(std::sqrt(n_eff) * d);
  return r;
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b,
                       double n_eff_a, double n_eff_b) {
  return ks_two_sample(a, {}, b, {}, n_eff_a, n_eff_b);
}

RateReport rate_report(const RunTiming& baseline, const RunTiming& partitioned) {
  auto check = [](const RunTiming& t, const char* which) {
    if (!(t.n_samples > 0.0) || !(t.max_wall > 0.0) || !(t.sum_cpu > 0.0))
      throw std::invalid_argument(std::string("rate_report: ") + which +
                                  " timing inputs must be positive");
  };
  check(baseline, "baseline");
  check(partitioned, "partitioned");
  RateReport r;
  r.baseline = baseline;
  r.partitioned = partitioned;
  r.sampling_rate = (partitioned.n_samples / partitioned.max_wall) *
                    (baseline.max_wall / baseline.n_samples);
  r.per_chain_rate = (partitioned.n_samples / partitioned.sum_cpu) *
                     (baseline.sum_cpu / baseline.n_samples);
  return r;
}

}  // namespace pmc
