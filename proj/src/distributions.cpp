#include "bayesio/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace bayesio
{
namespace
{

constexpr double kLn2Pi = 1.8378770664093454836;

// Hankel expansion, valid for x >> nu^2.
double log_bessel_i_asymptotic(double nu, double x)
{
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (k * 8.0 * x);
    if (std::abs(next) >= std::abs(term))
      break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum))
      break;
  }
  return x - 0.5 * std::log(2.0 * std::numbers::pi * x) + std::log(sum);
}

// Power series sum_k (x/2)^{2k+nu} / (k! Gamma(nu+k+1)), accumulated relative
// to its largest term.
double log_bessel_i_series(double nu, double x)
{
  const double log_half_x = std::log(0.5 * x);
  const double peak = 0.5 * (std::sqrt(nu * nu + x * x) - nu);
  const double k_peak = std::floor(peak);
  const double ref = (2.0 * k_peak + nu) * log_half_x - std::lgamma(k_peak + 1.0)
                     - std::lgamma(nu + k_peak + 1.0);

  double log_term = nu * log_half_x - std::lgamma(nu + 1.0);
  double sum = 0.0;
  for (double k = 0.0;; k += 1.0) {
    sum += std::exp(log_term - ref);
    if (k > peak && log_term < ref - 40.0)
      break;
    log_term += 2.0 * log_half_x - std::log(k + 1.0) - std::log(nu + k + 1.0);
  }
  return ref + std::log(sum);
}

}  // namespace

double log_bessel_i(double nu, double x)
{
  if (!(x > 0.0) || !std::isfinite(x))
    throw Error(ErrorKind::DomainError, "log_bessel_i requires finite x > 0");
  if (!(nu >= 0.0) || !std::isfinite(nu))
    throw Error(ErrorKind::DomainError, "log_bessel_i requires nu >= 0");
  if (x > 1000.0 && x > 25.0 * nu * nu)
    return log_bessel_i_asymptotic(nu, x);
  return log_bessel_i_series(nu, x);
}

double log_uniform_sphere_density(Eigen::Index h)
{
  const double half = 0.5 * static_cast<double>(h);
  return -(std::log(2.0) + half * std::log(std::numbers::pi) - std::lgamma(half));
}

double vmf_log_normalizer(Eigen::Index h, double kappa)
{
  if (kappa == 0.0)
    return log_uniform_sphere_density(h);
  const double order = 0.5 * static_cast<double>(h) - 1.0;
  return order * std::log(kappa) - 0.5 * static_cast<double>(h) * kLn2Pi
         - log_bessel_i(order, kappa);
}

double vmf_log_density(const UnitVector& x, const VmfParams& params)
{
  if (x.size() != params.mean.size())
    throw Error(ErrorKind::InvalidArgument, "vmf_log_density: dimension mismatch");
  return vmf_log_normalizer(x.size(), params.kappa) + params.kappa * params.mean.dot(x);
}

double vmf_mean_resultant_length(Eigen::Index h, double kappa)
{
  if (kappa == 0.0)
    return 0.0;
  const double order = 0.5 * static_cast<double>(h) - 1.0;
  return std::exp(log_bessel_i(order + 1.0, kappa) - log_bessel_i(order, kappa));
}

UnitVector vmf_sample(const VmfParams& params, Rng& rng)
{
  const Eigen::Index h = params.mean.size();
  if (h < 2)
    throw Error(ErrorKind::InvalidArgument, "vmf_sample requires h >= 2");
  if (!(params.kappa >= 0.0))
    throw Error(ErrorKind::DomainError, "vmf_sample requires kappa >= 0");

  const double dim = static_cast<double>(h - 1);
  const double kappa = params.kappa;
  // b, x0 and 1 - x0^2 in cancellation-free forms.
  const double b = dim / (2.0 * kappa + std::sqrt(4.0 * kappa * kappa + dim * dim));
  const double x0 = (1.0 - b) / (1.0 + b);
  const double one_minus_x0 = 2.0 * b / (1.0 + b);
  const double log_one_minus_x0_sq = std::log(4.0 * b) - 2.0 * std::log1p(b);

  std::gamma_distribution<double> gamma(0.5 * dim, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  double w = 0.0;
  double one_minus_w = 0.0;
  for (;;) {
    const double g1 = gamma(rng);
    const double g2 = gamma(rng);
    const double z = g1 / (g1 + g2);
    one_minus_w = 2.0 * b * z / (1.0 - (1.0 - b) * z);
    w = 1.0 - one_minus_w;
    const double t = one_minus_x0 + x0 * one_minus_w;
    const double log_accept =
        kappa * (one_minus_x0 - one_minus_w) + dim * (std::log(t) - log_one_minus_x0_sq);
    if (log_accept >= std::log(unif(rng)))
      break;
  }

  Eigen::VectorXd pole_sample(h);
  const double radial = std::sqrt(std::max(0.0, one_minus_w * (2.0 - one_minus_w)));
  if (h == 2) {
    pole_sample[0] = unif(rng) < 0.5 ? -radial : radial;
  } else {
    pole_sample.head(h - 1) = sample_uniform_sphere(h - 1, rng).coords() * radial;
  }
  pole_sample[h - 1] = w;
  return normalize(reflect_to(pole_sample, params.mean));
}

double gaussian_iso_log_density(const Eigen::Ref<const Eigen::VectorXd>& y,
                                const IsoGaussianParams& params)
{
  if (y.size() != params.mean.size())
    throw Error(ErrorKind::InvalidArgument, "gaussian_iso_log_density: dimension mismatch");
  const double n = static_cast<double>(y.size());
  return -0.5 * n * std::log(2.0 * std::numbers::pi * params.sigma2)
         - (y - params.mean).squaredNorm() / (2.0 * params.sigma2);
}

double half_cauchy_log_density(double s, double scale)
{
  if (!(s > 0.0))
    return -std::numeric_limits<double>::infinity();
  const double r = s / scale;
  return std::log(2.0 / (std::numbers::pi * scale)) - std::log1p(r * r);
}

double gamma_log_density(double k, double shape, double rate)
{
  if (!(k > 0.0))
    return -std::numeric_limits<double>::infinity();
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(k) - rate * k;
}

Eigen::VectorXd sample_standard_normal(Eigen::Index n, Rng& rng)
{
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i)
    z[i] = normal(rng);
  return z;
}

UnitVector sample_uniform_sphere(Eigen::Index h, Rng& rng)
{
  if (h < 1)
    throw Error(ErrorKind::InvalidArgument, "sample_uniform_sphere requires h >= 1");
  for (;;) {
    Eigen::VectorXd z = sample_standard_normal(h, rng);
    if (z.norm() > 1e-300)
      return normalize(z);
  }
}

}  // namespace bayesio
