#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include "pmc/mh.hpp"
#include "pmc/partition.hpp"
#include "pmc/types.hpp"

namespace pmc {

struct IntegrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IntegralEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::string method;
  std::size_t n_used = 0;   // samples inside the evaluation region
  ParameterBox region;      // harmonic-mean evaluation region, inside the box
};

struct IntegratorConfig {
  std::size_t min_samples = 100;
  /// Target fraction of samples the initial region must contain.
  double mass_fraction = 0.5;
  /// Expansion stops when max/min density inside the region would exceed this.
  double max_density_ratio = 1e3;
  /// An expansion shell must hold at least this fraction of the sample
  /// count it would have at the region's average density; volume the
  /// chains never visited would otherwise inflate V(R) unchecked.
  double min_shell_coverage = 0.2;
  double expand_factor = 1.25;
  std::size_t max_expand_rounds = 200;
};

/// Pluggable subspace integrator; estimates I_k from the subspace's own
/// samples with no further target evaluations.
class Integrator {
 public:
  virtual ~Integrator() = default;
  virtual std::string name() const = 0;
  virtual IntegralEstimate integrate(const SubspaceSamples& samples,
                                     const Subspace& subspace) const = 0;
};

/// Region-restricted harmonic mean: the region starts as the smallest
/// median-centered box holding `mass_fraction` of the samples and grows
/// axis-wise while the in-region density ratio stays bounded; the estimate
/// is V(R) * N / sum_{i in R} 1/f(i), evaluated in log space. The standard
/// error comes from a split-half over chains.
class HarmonicRegionIntegrator : public Integrator {
 public:
  explicit HarmonicRegionIntegrator(IntegratorConfig cfg = {}) : cfg_(cfg) {}
  std::string name() const override { return "harmonic-region"; }
  IntegralEstimate integrate(const SubspaceSamples& samples,
                             const Subspace& subspace) const override;

 private:
  IntegratorConfig cfg_;
};

std::unique_ptr<Integrator> make_integrator(const std::string& name,
                                            const IntegratorConfig& cfg = {});

/// Default-integrator convenience wrapper.
IntegralEstimate integrate_subspace(const SubspaceSamples& samples,
                                    const Subspace& subspace,
                                    const IntegratorConfig& cfg = {});

/// I = sum I_k with independent-subspace error propagation.
IntegralEstimate total_integral(const std::vector<IntegralEstimate>& estimates);

}  // namespace pmc
