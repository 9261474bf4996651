#include "pmc/target.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

namespace pmc {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)

Eigen::MatrixXd to_eigen(const std::vector<double>& flat, std::size_t m) {
  Eigen::MatrixXd out(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) out(i, j) = flat[i * m + j];
  return out;
}

}  // namespace

GaussianMixture::GaussianMixture(std::vector<double> weights,
                                 std::vector<std::vector<double>> means,
                                 std::vector<std::vector<double>> covariances) {
  if (weights.empty() || weights.size() != means.size() ||
      weights.size() != covariances.size())
    throw std::invalid_argument("GaussianMixture: component count mismatch");
  dim_ = means[0].size();
  if (dim_ == 0) throw std::invalid_argument("GaussianMixture: dimension must be >= 1");

  for (std::size_t c = 0; c < weights.size(); ++c) {
    if (!(weights[c] > 0.0))
      throw std::invalid_argument("GaussianMixture: weights must be positive");
    if (means[c].size() != dim_ || covariances[c].size() != dim_ * dim_)
      throw std::invalid_argument("GaussianMixture: component dimension mismatch");

    Eigen::MatrixXd cov = to_eigen(covariances[c], dim_);
    if (!cov.isApprox(cov.transpose(), 1e-12))
      throw std::invalid_argument("GaussianMixture: covariance not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("GaussianMixture: covariance not positive definite");
    Eigen::MatrixXd L = llt.matrixL();

    Component comp;
    comp.weight = weights[c];
    comp.log_weight = std::log(weights[c]);
    comp.mean = means[c];
    comp.cov = covariances[c];
    comp.chol.assign(dim_ * dim_, 0.0);
    double log_det_half = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      for (std::size_t j = 0; j <= i; ++j) comp.chol[i * dim_ + j] = L(i, j);
      log_det_half += std::log(L(i, i));
    }
    comp.log_norm = -0.5 * static_cast<double>(dim_) * kLog2Pi - log_det_half;
    total_weight_ += comp.weight;
    comps_.push_back(std::move(comp));
  }
}

double GaussianMixture::log_density(std::span<const double> x) const {
  if (x.size() != dim_)
    throw std::invalid_argument("GaussianMixture: point dimension mismatch");

  // log-sum-exp over per-component log densities
  double max_term = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(comps_.size());
  std::vector<double> z(dim_);
  for (std::size_t c = 0; c < comps_.size(); ++c) {
    const Component& comp = comps_[c];
    // forward solve L z = x - mu, quadratic form = |z|^2
    double quad = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      double s = x[i] - comp.mean[i];
      for (std::size_t j = 0; j < i; ++j) s -= comp.chol[i * dim_ + j] * z[j];
      z[i] = s / comp.chol[i * dim_ + i];
      quad += z[i] * z[i];
    }
    terms[c] = comp.log_weight + comp.log_norm - 0.5 * quad;
    max_term = std::max(max_term, terms[c]);
  }
  if (!std::isfinite(max_term)) return -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - max_term);
  return max_term + std::log(acc);
}

void GaussianMixture::sample(Rng& rng, std::span<double> out) const {
  if (out.size() != dim_)
    throw std::invalid_argument("GaussianMixture: output dimension mismatch");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng) * total_weight_;
  std::size_t pick = comps_.size() - 1;
  double acc = 0.0;
  for (std::size_t c = 0; c < comps_.size(); ++c) {
    acc += comps_[c].weight;
    if (u < acc) {
      pick = c;
      break;
    }
  }
  const Component& comp = comps_[pick];
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> z(dim_);
  for (std::size_t i = 0; i < dim_; ++i) z[i] = gauss(rng);
  for (std::size_t i = 0; i < dim_; ++i) {
    double s = comp.mean[i];
    for (std::size_t j = 0; j <= i; ++j) s += comp.chol[i * dim_ + j] * z[j];
    out[i] = s;
  }
}

std::vector<double> GaussianMixture::mean() const {
  std::vector<double> m(dim_, 0.0);
  for (const Component& c : comps_)
    for (std::size_t i = 0; i < dim_; ++i)
      m[i] += (c.weight / total_weight_) * c.mean[i];
  return m;
}

std::vector<double> GaussianMixture::covariance() const {
  // mixture covariance = sum_c w_c (Sigma_c + mu_c mu_c^T) - mu mu^T
  std::vector<double> m = mean();
  std::vector<double> cov(dim_ * dim_, 0.0);
  for (const Component& c : comps_) {
    double w = c.weight / total_weight_;
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j < dim_; ++j)
        cov[i * dim_ + j] += w * (c.cov[i * dim_ + j] + c.mean[i] * c.mean[j]);
  }
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) cov[i * dim_ + j] -= m[i] * m[j];
  return cov;
}

double mixture_log_density(const GaussianMixture& gm, std::span<const double> x) {
  return gm.log_density(x);
}

Matrix mixture_iid_sample(const GaussianMixture& gm, std::size_t n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("mixture_iid_sample: n must be >= 1");
  Matrix out(n, gm.dim());
  for (std::size_t i = 0; i < n; ++i) gm.sample(rng, out.row(i));
  return out;
}

TargetDensity make_mixture_target(std::string name, GaussianMixture gm,
                                  ParameterBox support,
                                  std::optional<double> known_integral) {
  if (support.dim() != gm.dim())
    throw std::invalid_argument("make_mixture_target: box dimension mismatch");
  auto shared = std::make_shared<GaussianMixture>(std::move(gm));
  TargetDensity t;
  t.name = std::move(name);
  t.dim = shared->dim();
  t.support = std::move(support);
  t.known_integral = known_integral;
  t.log_density = [shared](std::span<const double> x) {
    return shared->log_density(x);
  };
  t.iid_oracle = [shared](Rng& rng, std::span<double> out) {
    shared->sample(rng, out);
  };
  return t;
}

std::map<std::string, TargetDensity> make_benchmark_targets() {
  std::map<std::string, TargetDensity> catalog;

  {
    // Four bivariate normals: heavy modes (0.48) in the upper-right and
    // lower-left quadrants, light modes (0.02) in the other two.
    std::vector<double> w = {0.48, 0.48, 0.02, 0.02};
    std::vector<std::vector<double>> mu = {
        {3.5, 3.5}, {-3.5, -3.5}, {-3.5, 3.5}, {3.5, -3.5}};
    std::vector<double> heavy_cov = {0.33, 0.17, 0.17, 0.33};
    std::vector<double> light_cov = {0.019, -0.003, -0.003, 0.017};
    std::vector<std::vector<double>> cov = {heavy_cov, heavy_cov, light_cov,
                                            light_cov};
    GaussianMixture gm(w, mu, cov);
    ParameterBox box(std::vector<double>(2, -10.0), std::vector<double>(2, 10.0));
    catalog.emplace("mix2d",
                    make_mixture_target("mix2d", std::move(gm), box, 1.0));
  }

  {
    std::vector<double> w(4, 0.25);
    std::vector<std::vector<double>> mu = {
        {4.6, 14.8, 12.7, 0.4, -7.3, 14.5, -14.0, -9.8, -12.3},
        {2.5, 2.9, 2.7, 8.7, -1.6, -11.0, -14.0, -7.5, -8.7},
        {-4.8, 0.68, -12.0, -5.0, 4.4, -0.45, 8.7, -4.5, 2.8},
        {-1.1, 4.8, 3.3, 13.0, -4.6, 0.99, -9.5, 14.0, 11.0}};
    std::vector<double> diag = {12.64, 10.48, 33.03, 27.45};
    std::vector<std::vector<double>> cov;
    for (double d : diag) {
      std::vector<double> c(81, 0.0);
      for (std::size_t i = 0; i < 9; ++i) c[i * 9 + i] = d;
      cov.push_back(std::move(c));
    }
    GaussianMixture gm(w, mu, cov);
    ParameterBox box(std::vector<double>(9, -50.0), std::vector<double>(9, 50.0));
    catalog.emplace("mix9d",
                    make_mixture_target("mix9d", std::move(gm), box, 1.0));
  }

  return catalog;
}

TargetDensity load_target_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("target spec: cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("target spec: " + std::string(e.what()));
  }

  auto require = [&](const char* key) {
    if (!j.contains(key))
      throw std::invalid_argument(std::string("target spec: missing field '") +
                                  key + "'");
  };
  require("dim");
  require("box");
  require("mixture");

  std::size_t dim = j.at("dim").get<std::size_t>();
  auto lower = j.at("box").at("lower").get<std::vector<double>>();
  auto upper = j.at("box").at("upper").get<std::vector<double>>();
  if (lower.size() != dim || upper.size() != dim)
    throw std::invalid_argument("target spec: field 'box' has wrong dimension");

  const auto& mix = j.at("mixture");
  auto weights = mix.at("weights").get<std::vector<double>>();
  auto means = mix.at("means").get<std::vector<std::vector<double>>>();
  auto covs_nested =
      mix.at("covariances").get<std::vector<std::vector<std::vector<double>>>>();
  std::vector<std::vector<double>> covs;
  for (const auto& c : covs_nested) {
    std::vector<double> flat;
    for (const auto& row : c) flat.insert(flat.end(), row.begin(), row.end());
    covs.push_back(std::move(flat));
  }

  GaussianMixture gm(weights, means, covs);
  double total = gm.total_weight();
  std::string name = j.value("name", std::string("custom"));
  return make_mixture_target(name, std::move(gm),
                             ParameterBox(std::move(lower), std::move(upper)),
                             total);
}

TargetDensity resolve_target(const std::string& name_or_path) {
  auto catalog = make_benchmark_targets();
  auto it = catalog.find(name_or_path);
  if (it != catalog.end()) return it->second;
  if (name_or_path.find(".json") != std::string::npos)
    return load_target_json(name_or_path);
  std::ostringstream msg;
  msg << "unknown target '" << name_or_path << "'; expected one of";
  for (const auto& [k, v] : catalog) msg << " " << k;
  msg << " or a .json spec path";
  throw std::invalid_argument(msg.str());
}

}  // namespace pmc
