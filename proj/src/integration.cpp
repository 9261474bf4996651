#include "pmc/integration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pmc {

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  double pos = q * double(sorted.size() - 1);
  std::size_t i = std::size_t(pos);
  if (i + 1 >= sorted.size()) return sorted.back();
  double frac = pos - double(i);
  return sorted[i] * (1.0 - frac) + sorted[i + 1] * frac;
}

bool region_contains(const std::vector<double>& lo, const std::vector<double>& hi,
                     std::span<const double> x) {
  for (std::size_t d = 0; d < lo.size(); ++d)
    if (x[d] < lo[d] || x[d] > hi[d]) return false;
  return true;
}

// log( sum_i exp(v_i) ) over the selected rows
double log_sum_exp(const std::vector<double>& v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - mx);
  return mx + std::log(acc);
}

}  // namespace

IntegralEstimate HarmonicRegionIntegrator::integrate(
    const SubspaceSamples& s, const Subspace& subspace) const {
  const std::size_t n = s.size();
  const std::size_t m = subspace.box.dim();
  if (n < cfg_.min_samples)
    throw IntegrationError("subspace " + std::to_string(subspace.index) +
                           " has " + std::to_string(n) + " samples; need >= " +
                           std::to_string(cfg_.min_samples));
  if (s.log_densities.size() != n)
    throw IntegrationError("log densities missing");

  // Median-centered core region holding `mass_fraction` of the samples.
  std::vector<double> med(m), scale(m);
  std::vector<double> buf(n);
  for (std::size_t d = 0; d < m; ++d) {
    for (std::size_t i = 0; i < n; ++i) buf[i] = s.samples(i, d);
    std::sort(buf.begin(), buf.end());
    med[d] = quantile_sorted(buf, 0.5);
    for (std::size_t i = 0; i < n; ++i) buf[i] = std::abs(buf[i] - med[d]);
    std::sort(buf.begin(), buf.end());
    double mad = quantile_sorted(buf, 0.5);
    scale[d] = mad > 0.0 ? mad : 1e-12 * subspace.box.side(d);
  }
  std::vector<double> radius(n);
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    for (std::size_t d = 0; d < m; ++d)
      r = std::max(r, std::abs(s.samples(i, d) - med[d]) / scale[d]);
    radius[i] = r;
  }
  std::size_t k = std::max<std::size_t>(
      1, std::size_t(std::ceil(cfg_.mass_fraction * double(n))));
  k = std::min(k, n);
  std::nth_element(radius.begin(), radius.begin() + long(k - 1), radius.end());
  double alpha = radius[k - 1];

  std::vector<double> half(m), lo(m), hi(m);
  for (std::size_t d = 0; d < m; ++d) {
    half[d] = alpha * scale[d];
    if (half[d] <= 0.0) half[d] = 1e-9 * subspace.box.side(d);
    lo[d] = std::max(med[d] - half[d], subspace.box.lower[d]);
    hi[d] = std::min(med[d] + half[d], subspace.box.upper[d]);
  }

  const double max_log_ratio = std::log(cfg_.max_density_ratio);
  auto region_stats = [&](const std::vector<double>& clo,
                          const std::vector<double>& chi) {
    struct Stats {
      std::size_t count = 0;
      double min_logf = std::numeric_limits<double>::infinity();
      double max_logf = -std::numeric_limits<double>::infinity();
    } st;
    for (std::size_t i = 0; i < n; ++i) {
      if (!region_contains(clo, chi, s.samples.row(i))) continue;
      ++st.count;
      st.min_logf = std::min(st.min_logf, s.log_densities[i]);
      st.max_logf = std::max(st.max_logf, s.log_densities[i]);
    }
    return st;
  };
  auto volume_of = [&](const std::vector<double>& clo,
                       const std::vector<double>& chi) {
    double v = 1.0;
    for (std::size_t d = 0; d < m; ++d) v *= chi[d] - clo[d];
    return v;
  };

  // Grow axis-wise while the region's density variation stays bounded.
  // The sampled log-density range guards the covered part; the shell-count
  // test guards the uncovered part: a shell the chains left (nearly) empty
  // although at the region's average density it should hold samples marks
  // volume the estimator must not take in, since it would inflate V(R)
  // without feeding the harmonic sum.
  std::size_t n_region = region_stats(lo, hi).count;
  for (std::size_t round = 0; round < cfg_.max_expand_rounds; ++round) {
    bool grew = false;
    for (std::size_t d = 0; d < m; ++d) {
      double new_half = half[d] * cfg_.expand_factor;
      double nlo = std::max(med[d] - new_half, subspace.box.lower[d]);
      double nhi = std::min(med[d] + new_half, subspace.box.upper[d]);
      if (nlo == lo[d] && nhi == hi[d]) continue;  // already at the boundary
      std::vector<double> clo = lo, chi = hi;
      clo[d] = nlo;
      chi[d] = nhi;
      auto st = region_stats(clo, chi);
      if (st.count > 0 && st.max_logf - st.min_logf > max_log_ratio) continue;
      double shell_ratio =
          (volume_of(clo, chi) - volume_of(lo, hi)) / volume_of(lo, hi);
      double required =
          double(n_region) * shell_ratio * cfg_.min_shell_coverage;
      if (double(st.count - n_region) + 1.0 <= required) continue;
      half[d] = new_half;
      lo[d] = nlo;
      hi[d] = nhi;
      n_region = st.count;
      grew = true;
    }
    if (!grew) break;
  }

  // Harmonic mean on the region, all in log space.
  std::vector<std::size_t> inside;
  for (std::size_t i = 0; i < n; ++i)
    if (region_contains(lo, hi, s.samples.row(i))) inside.push_back(i);
  if (inside.empty())
    throw IntegrationError("no samples inside the evaluation region");

  double log_volume = 0.0;
  for (std::size_t d = 0; d < m; ++d) log_volume += std::log(hi[d] - lo[d]);

  auto log_inverse_estimate = [&](const std::vector<std::size_t>& rows,
                                  std::size_t n_total) {
    // log(1/I) for one group, kept in log space; tail subspaces can have
    // 1/f far beyond double range
    std::vector<double> neg_logf;
    neg_logf.reserve(rows.size());
    for (std::size_t i : rows) neg_logf.push_back(-s.log_densities[i]);
    double lse = log_sum_exp(neg_logf);
    if (!std::isfinite(lse))
      throw IntegrationError("densities vanish inside the evaluation region");
    return lse - log_volume - std::log(double(n_total));
  };
  double value = std::exp(-log_inverse_estimate(inside, n));

  // Uncertainty from the spread of per-chain group estimates (contiguous
  // blocks when there is a single chain). The pooled estimate is the
  // harmonic mean of the group estimates, so the spread is taken on the
  // inverse scale.
  std::vector<std::uint32_t> ids = s.chain_ids;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::vector<std::vector<std::size_t>> group_rows;
  std::vector<std::size_t> group_total;
  if (ids.size() >= 2) {
    std::vector<std::size_t> slot(ids.back() + 1);
    for (std::size_t j = 0; j < ids.size(); ++j) slot[ids[j]] = j;
    group_rows.resize(ids.size());
    group_total.assign(ids.size(), 0);
    for (std::size_t i = 0; i < n; ++i) group_total[slot[s.chain_ids[i]]] += 1;
    for (std::size_t i : inside) group_rows[slot[s.chain_ids[i]]].push_back(i);
  } else {
    const std::size_t n_groups = 8;
    group_rows.resize(n_groups);
    group_total.assign(n_groups, 0);
    for (std::size_t i = 0; i < n; ++i) group_total[i * n_groups / n] += 1;
    for (std::size_t i : inside) group_rows[i * n_groups / n].push_back(i);
  }
  std::vector<double> log_inv;
  for (std::size_t g = 0; g < group_rows.size(); ++g)
    if (!group_rows[g].empty() && group_total[g] > 0)
      log_inv.push_back(log_inverse_estimate(group_rows[g], group_total[g]));

  double std_error;
  if (log_inv.size() < 2) {
    std_error = value;  // spread unmeasurable; be pessimistic
  } else {
    double lbar = 0.0;
    for (double l : log_inv) lbar += l;
    lbar /= double(log_inv.size());
    double mean_r = 0.0;
    std::vector<double> rel(log_inv.size());
    for (std::size_t g = 0; g < log_inv.size(); ++g) {
      rel[g] = std::exp(log_inv[g] - lbar);
      mean_r += rel[g];
    }
    mean_r /= double(rel.size());
    double var_r = 0.0;
    for (double r : rel) var_r += (r - mean_r) * (r - mean_r);
    var_r /= double(rel.size() - 1);
    std_error =
        value * std::sqrt(var_r / double(rel.size())) / mean_r;
  }

  IntegralEstimate est;
  est.value = value;
  est.std_error = std_error;
  est.method = name();
  est.n_used = inside.size();
  est.region = ParameterBox(lo, hi);
  return est;
}

std::unique_ptr<Integrator> make_integrator(const std::string& name,
                                            const IntegratorConfig& cfg) {
  if (name == "harmonic-region")
    return std::make_unique<HarmonicRegionIntegrator>(cfg);
  throw std::invalid_argument("unknown integrator '" + name + "'");
}

IntegralEstimate integrate_subspace(const SubspaceSamples& samples,
                                    const Subspace& subspace,
                                    const IntegratorConfig& cfg) {
  return HarmonicRegionIntegrator(cfg).integrate(samples, subspace);
}

IntegralEstimate total_integral(const std::vector<IntegralEstimate>& estimates) {
  if (estimates.empty())
    throw std::invalid_argument("total_integral: no estimates");
  IntegralEstimate total;
  total.method = "sum";
  double var = 0.0;
  for (const IntegralEstimate& e : estimates) {
    total.value += e.value;
    var += e.std_error * e.std_error;
    total.n_used += e.n_used;
  }
  total.std_error = std::sqrt(var);
  return total;
}

}  // namespace pmc
