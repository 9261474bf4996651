#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pmc/rng.hpp"
#include "pmc/types.hpp"

namespace pmc {

/// Evaluatable log-density over a box support. Immutable after construction
/// and safe for concurrent evaluation; callers own their RNG streams.
struct TargetDensity {
  std::string name;
  std::size_t dim = 0;
  ParameterBox support;
  std::function<double(std::span<const double>)> log_density;
  std::optional<double> known_integral;
  /// Draws one exact sample into `out` (size dim); null when unavailable.
  std::function<void(Rng&, std::span<double>)> iid_oracle;

  bool has_oracle() const { return static_cast<bool>(iid_oracle); }
};

/// Mixture of multivariate normals, each component individually normalized,
/// so the mixture integrates to the sum of the weights.
class GaussianMixture {
 public:
  /// `covariances` are full row-major m x m matrices; a Cholesky factor per
  /// component is computed once here.
  GaussianMixture(std::vector<double> weights,
                  std::vector<std::vector<double>> means,
                  std::vector<std::vector<double>> covariances);

  std::size_t dim() const { return dim_; }
  std::size_t components() const { return comps_.size(); }
  double total_weight() const { return total_weight_; }

  double log_density(std::span<const double> x) const;
  void sample(Rng& rng, std::span<double> out) const;

  // Analytic moments, used by statistical checks.
  std::vector<double> mean() const;
  std::vector<double> covariance() const;  // row-major m x m

  double component_weight(std::size_t i) const { return comps_[i].weight; }
  const std::vector<double>& component_mean(std::size_t i) const {
    return comps_[i].mean;
  }
  const std::vector<double>& component_covariance(std::size_t i) const {
    return comps_[i].cov;
  }

 private:
  struct Component {
    double weight;
    double log_weight;
    double log_norm;  // -m/2 log(2pi) - sum log L_ii
    std::vector<double> mean;
    std::vector<double> cov;   // row-major
    std::vector<double> chol;  // lower-triangular factor, row-major
  };

  std::size_t dim_ = 0;
  double total_weight_ = 0.0;
  std::vector<Component> comps_;
};

double mixture_log_density(const GaussianMixture& gm, std::span<const double> x);

/// n i.i.d. draws: categorical component choice proportional to the weights,
/// then a Gaussian draw through the component's Cholesky factor.
Matrix mixture_iid_sample(const GaussianMixture& gm, std::size_t n, Rng& rng);

TargetDensity make_mixture_target(std::string name, GaussianMixture gm,
                                  ParameterBox support,
                                  std::optional<double> known_integral);

/// Built-in benchmark densities: "mix2d" (four bivariate normals, two heavy
/// and two light modes) and "mix9d" (four equally weighted 9-dimensional
/// normals with diagonal covariances).
std::map<std::string, TargetDensity> make_benchmark_targets();

/// Loads a target from a declarative JSON spec:
///   {dim, box:{lower,upper}, mixture:{weights, means, covariances}}
TargetDensity load_target_json(const std::string& path);

/// Resolves a --target argument: a catalog name or a path to a JSON spec.
TargetDensity resolve_target(const std::string& name_or_path);

}  // namespace pmc
