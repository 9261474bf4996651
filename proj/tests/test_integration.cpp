#include <doctest.h>

#include <cmath>
#include <limits>

#include "pmc/integration.hpp"
#include "pmc/rng.hpp"

using namespace pmc;

namespace {

constexpr double kLogRoot2Pi = 0.9189385332046727;  // log sqrt(2*pi)

SubspaceSamples make_samples(const Matrix& pts,
                             const std::vector<double>& logf,
                             std::size_t n_chains) {
  SubspaceSamples s;
  s.samples = pts;
  s.log_densities = logf;
  s.chain_ids.resize(pts.rows());
  for (std::size_t i = 0; i < pts.rows(); ++i)
    s.chain_ids[i] = std::uint32_t(i % n_chains);
  return s;
}

// i.i.d. N(0,1) truncated to [-1,1] by rejection, with normalized log pdf.
SubspaceSamples truncated_normal_samples(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix pts(n, 1);
  std::vector<double> logf(n);
  std::size_t i = 0;
  while (i < n) {
    double x = g(rng);
    if (x < -1.0 || x > 1.0) continue;
    pts(i, 0) = x;
    logf[i] = -0.5 * x * x - kLogRoot2Pi;
    ++i;
  }
  return make_samples(pts, logf, 10);
}

// Simpson's rule for the standard normal pdf mass on [-1,1].
double normal_mass_simpson() {
  const std::size_t n = 10000;  // even panel count
  const double a = -1.0, h = 2.0 / double(n);
  auto pdf = [](double x) { return std::exp(-0.5 * x * x - kLogRoot2Pi); };
  double acc = pdf(-1.0) + pdf(1.0);
  for (std::size_t i = 1; i < n; ++i)
    acc += pdf(a + double(i) * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("uniform density integrates exactly for any sample count") {
  ParameterBox box({0.0, 0.0}, {2.0, 3.0});
  Subspace sub{0, box, 0};
  const double c = 2.5;

  for (std::size_t n : {5ul, 1ul, 500ul}) {
    Rng rng(n);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Matrix pts(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
      pts(i, 0) = 2.0 * unif(rng);
      pts(i, 1) = 3.0 * unif(rng);
    }
    std::vector<double> logf(n, std::log(c));
    SubspaceSamples s = make_samples(pts, logf, 2);
    IntegratorConfig cfg;
    cfg.min_samples = 1;
    IntegralEstimate est = integrate_subspace(s, sub, cfg);
    CHECK(est.value == doctest::Approx(c * 6.0).epsilon(1e-12));
    if (n > 1) CHECK(est.std_error == doctest::Approx(0.0));
    CHECK(est.n_used == n);  // flat density: the region grows to the box
    for (std::size_t d = 0; d < 2; ++d) {
      CHECK(est.region.lower[d] == doctest::Approx(box.lower[d]));
      CHECK(est.region.upper[d] == doctest::Approx(box.upper[d]));
    }
  }
}

TEST_CASE("truncated standard normal mass against quadrature") {
  double oracle = normal_mass_simpson();
  CHECK(oracle == doctest::Approx(0.682689492137).epsilon(1e-9));

  ParameterBox box({-1.0}, {1.0});
  Subspace sub{0, box, 0};
  SubspaceSamples s = truncated_normal_samples(100000, 31);
  IntegralEstimate est = integrate_subspace(s, sub);
  REQUIRE(est.std_error > 0.0);
  CHECK(std::abs(est.value - oracle) < 5.0 * est.std_error);
  // the bounded density ratio lets the region reach the whole box
  CHECK(est.region.lower[0] == doctest::Approx(-1.0));
  CHECK(est.region.upper[0] == doctest::Approx(1.0));
}

TEST_CASE("scaling the density scales the estimate exactly") {
  SubspaceSamples s = truncated_normal_samples(5000, 7);
  ParameterBox box({-1.0}, {1.0});
  Subspace sub{0, box, 0};
  IntegralEstimate base = integrate_subspace(s, sub);

  const double c = 137.0;
  SubspaceSamples scaled = s;
  for (double& lf : scaled.log_densities) lf += std::log(c);
  IntegralEstimate up = integrate_subspace(scaled, sub);
  CHECK(up.value == doctest::Approx(c * base.value).epsilon(1e-12));
  CHECK(up.std_error == doctest::Approx(c * base.std_error).epsilon(1e-12));
  CHECK(up.n_used == base.n_used);
}

TEST_CASE("evaluation region stays inside the subspace box") {
  Rng rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  ParameterBox box({-0.5, -2.0}, {0.5, 2.0});
  Subspace sub{3, box, 0};
  const std::size_t n = 2000;
  Matrix pts(n, 2);
  std::vector<double> logf(n);
  std::size_t i = 0;
  while (i < n) {
    double x = g(rng), y = g(rng);
    std::vector<double> p = {x, y};
    if (!box.contains(p)) continue;
    pts(i, 0) = x;
    pts(i, 1) = y;
    logf[i] = -0.5 * (x * x + y * y);
    ++i;
  }
  IntegralEstimate est = integrate_subspace(make_samples(pts, logf, 5), sub);
  for (std::size_t d = 0; d < 2; ++d) {
    CHECK(est.region.lower[d] >= box.lower[d]);
    CHECK(est.region.upper[d] <= box.upper[d]);
  }
  CHECK(est.n_used >= n / 2);
  CHECK(est.method == "harmonic-region");
}

TEST_CASE("split-half error shrinks roughly as one over root n") {
  ParameterBox box({-1.0}, {1.0});
  Subspace sub{0, box, 0};
  const int reps = 20;
  auto mean_se = [&](std::size_t n, std::uint64_t seed0) {
    double acc = 0.0;
    for (int r = 0; r < reps; ++r) {
      SubspaceSamples s = truncated_normal_samples(n, seed0 + std::uint64_t(r));
      acc += integrate_subspace(s, sub).std_error;
    }
    return acc / double(reps);
  };
  double se3 = mean_se(1000, 100);
  double se4 = mean_se(10000, 200);
  double se5 = mean_se(100000, 300);
  double root10 = std::sqrt(10.0);
  for (double ratio : {se3 / se4, se4 / se5}) {
    CHECK(ratio > root10 / 2.0);
    CHECK(ratio < root10 * 2.0);
  }
}

TEST_CASE("too few samples fail loudly") {
  SubspaceSamples s = truncated_normal_samples(50, 3);
  ParameterBox box({-1.0}, {1.0});
  Subspace sub{0, box, 0};
  CHECK_THROWS_AS(integrate_subspace(s, sub), IntegrationError);
}

TEST_CASE("vanishing densities fail loudly") {
  const std::size_t n = 200;
  Matrix pts(n, 1);
  std::vector<double> logf(n, -std::numeric_limits<double>::infinity());
  Rng rng(9);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) pts(i, 0) = unif(rng);
  ParameterBox box({-1.0}, {1.0});
  Subspace sub{0, box, 0};
  CHECK_THROWS_AS(integrate_subspace(make_samples(pts, logf, 2), sub),
                  IntegrationError);
}

TEST_CASE("total integral sums values and propagates errors") {
  IntegralEstimate a;
  a.value = 0.75;
  a.std_error = 0.03;
  a.n_used = 10;
  IntegralEstimate b;
  b.value = 0.25;
  b.std_error = 0.04;
  b.n_used = 20;

  IntegralEstimate only = total_integral({a});
  CHECK(only.value == 0.75);
  CHECK(only.std_error == 0.03);

  IntegralEstimate both = total_integral({a, b});
  CHECK(both.value == doctest::Approx(1.0));
  CHECK(both.std_error == doctest::Approx(0.05));
  CHECK(both.n_used == 30);

  CHECK_THROWS_AS(total_integral({}), std::invalid_argument);
}
