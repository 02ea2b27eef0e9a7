#include "doctest.h"

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include <cmath>
#include <numbers>

#include "bayesio/distributions.hpp"
#include "oracles.hpp"

using namespace bayesio;
using Eigen::VectorXd;

TEST_CASE("log_bessel_i matches a long-double series")
{
  for (double nu : {0.0, 0.5, 1.0, 1.5, 4.0, 9.0, 30.0}) {
    for (double x : {1e-6, 1e-3, 0.1, 1.0, 7.5, 50.0, 400.0, 999.0, 1500.0, 4000.0}) {
      const double expected = oracle::log_bessel_i_series(nu, x);
      CAPTURE(nu);
      CAPTURE(x);
      CHECK(std::abs(log_bessel_i(nu, x) - expected) <= 1e-12 * std::max(1.0, std::abs(expected)));
    }
  }
}

TEST_CASE("log_bessel_i agrees with boost where I_nu is representable")
{
  for (double nu : {0.0, 0.5, 2.5, 8.0})
    for (double x : {0.01, 3.0, 30.0, 300.0})
      CHECK(log_bessel_i(nu, x)
            == doctest::Approx(std::log(boost::math::cyl_bessel_i(nu, x))).epsilon(1e-13));
}

TEST_CASE("log_bessel_i half-order closed form, including the asymptotic branch")
{
  // I_{1/2}(x) = sqrt(2 / (pi x)) sinh(x).
  for (double x : {0.5, 5.0, 80.0, 2000.0, 1e5, 1e7}) {
    const double expected = x + std::log1p(-std::exp(-2.0 * x)) - std::log(2.0)
                            + 0.5 * std::log(2.0 / (std::numbers::pi * x));
    CHECK(log_bessel_i(0.5, x) == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("log_bessel_i rejects bad arguments")
{
  CHECK_THROWS_AS(log_bessel_i(1.0, 0.0), Error);
  CHECK_THROWS_AS(log_bessel_i(1.0, -2.0), Error);
  CHECK_THROWS_AS(log_bessel_i(-1.0, 2.0), Error);
  CHECK_THROWS_AS(log_bessel_i(1.0, std::numeric_limits<double>::infinity()), Error);
}

TEST_CASE("vmf normalizer on S^2 has the closed form kappa / (4 pi sinh kappa)")
{
  for (double kappa : {1e-6, 0.3, 2.0, 25.0, 600.0, 5000.0}) {
    const double expected = std::log(kappa) - std::log(4.0 * std::numbers::pi) - kappa
                            - std::log(-std::expm1(-2.0 * kappa)) + std::log(2.0);
    CHECK(vmf_log_normalizer(3, kappa) == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(vmf_log_normalizer(3, 0.0) == doctest::Approx(-std::log(4.0 * std::numbers::pi)));
  CHECK(vmf_log_normalizer(7, 1e-9) == doctest::Approx(vmf_log_normalizer(7, 0.0)).epsilon(1e-8));
}

TEST_CASE("uniform sphere density")
{
  CHECK(log_uniform_sphere_density(2) == doctest::Approx(-std::log(2.0 * std::numbers::pi)));
  CHECK(log_uniform_sphere_density(3) == doctest::Approx(-std::log(4.0 * std::numbers::pi)));
}

TEST_CASE("vmf density on the circle integrates to one")
{
  const UnitVector mean = normalize(Eigen::Vector2d(0.3, -1.0));
  for (double kappa : {0.0, 0.5, 10.0, 200.0}) {
    const VmfParams params{mean, kappa};
    auto f = [&](double phi) {
      return std::exp(vmf_log_density(normalize(Eigen::Vector2d(std::cos(phi), std::sin(phi))), params));
    };
    CHECK(oracle::simpson(f, -std::numbers::pi, std::numbers::pi, 20000) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("vmf sampler: mean resultant length and direction")
{
  Rng rng(2024);
  for (Eigen::Index h : {2, 3, 6}) {
    for (double kappa : {0.0, 1.0, 10.0}) {
      const UnitVector mean = sample_uniform_sphere(h, rng);
      const VmfParams params{mean, kappa};
      VectorXd sum = VectorXd::Zero(h);
      const int draws = 20000;
      for (int t = 0; t < draws; ++t) {
        const UnitVector x = vmf_sample(params, rng);
        CHECK(std::abs(x.coords().norm() - 1.0) <= 1e-12);
        sum += x.coords();
      }
      const VectorXd avg = sum / draws;
      CAPTURE(h);
      CAPTURE(kappa);
      CHECK(std::abs(avg.dot(mean.coords()) - vmf_mean_resultant_length(h, kappa)) <= 0.02);
      if (kappa > 0.0)
        CHECK((avg - avg.dot(mean.coords()) * mean.coords()).norm() < 0.03);
    }
  }
}

TEST_CASE("vmf sampler concentrates for huge kappa")
{
  Rng rng(1);
  const UnitVector mean = sample_uniform_sphere(5, rng);
  for (int t = 0; t < 1000; ++t)
    CHECK(geodesic_distance(vmf_sample({mean, 1e6}, rng), mean) < 0.01);
}

TEST_CASE("vmf mean resultant length on S^2 is coth(k) - 1/k")
{
  for (double kappa : {0.1, 1.0, 10.0, 100.0})
    CHECK(vmf_mean_resultant_length(3, kappa)
          == doctest::Approx(1.0 / std::tanh(kappa) - 1.0 / kappa).epsilon(1e-12));
  CHECK(vmf_mean_resultant_length(4, 0.0) == 0.0);
}

TEST_CASE("gaussian, half-Cauchy and gamma log-densities")
{
  const VectorXd y = VectorXd::LinSpaced(3, -1.0, 1.0);
  const VectorXd mu = VectorXd::Constant(3, 0.5);
  double expected = 0.0;
  for (Eigen::Index i = 0; i < 3; ++i)
    expected += -0.5 * std::log(2.0 * std::numbers::pi * 0.2) - (y[i] - mu[i]) * (y[i] - mu[i]) / 0.4;
  CHECK(gaussian_iso_log_density(y, {mu, 0.2}) == doctest::Approx(expected).epsilon(1e-14));

  CHECK(half_cauchy_log_density(0.0, 1.0) == -std::numeric_limits<double>::infinity());
  CHECK(half_cauchy_log_density(-1.0, 1.0) == -std::numeric_limits<double>::infinity());
  CHECK(half_cauchy_log_density(2.0, 2.0) == doctest::Approx(std::log(1.0 / (2.0 * std::numbers::pi))));
  // Mass on (0, inf) via the substitution s = tan(u).
  auto hc = [](double u) {
    return std::exp(half_cauchy_log_density(std::tan(u), 1.0)) / (std::cos(u) * std::cos(u));
  };
  CHECK(oracle::simpson(hc, 1e-12, std::numbers::pi / 2 - 1e-9, 20000) == doctest::Approx(1.0).epsilon(1e-6));

  const boost::math::gamma_distribution<double> g(2.0, 1.0 / 0.1);
  for (double k : {0.01, 1.0, 20.0, 300.0})
    CHECK(gamma_log_density(k, 2.0, 0.1) == doctest::Approx(std::log(boost::math::pdf(g, k))).epsilon(1e-13));
  CHECK(gamma_log_density(0.0, 2.0, 0.1) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("uniform sphere sampler has zero mean and unit norm")
{
  Rng rng(77);
  VectorXd sum = VectorXd::Zero(4);
  for (int t = 0; t < 40000; ++t) {
    const UnitVector u = sample_uniform_sphere(4, rng);
    CHECK(std::abs(u.coords().norm() - 1.0) <= 1e-12);
    sum += u.coords();
  }
  CHECK((sum / 40000.0).norm() < 0.02);
}

TEST_CASE("samplers are deterministic per seed")
{
  Rng a(5), b(5);
  const UnitVector mean = sample_uniform_sphere(3, a);
  (void)sample_uniform_sphere(3, b);
  for (int t = 0; t < 100; ++t)
    CHECK(vmf_sample({mean, 4.0}, a) == vmf_sample({mean, 4.0}, b));
}
