#pragma once

#include <Eigen/Core>

#include "bayesio/geometry.hpp"
#include "bayesio/random.hpp"

namespace bayesio
{

/// von Mises-Fisher law on S^{h-1}.
struct VmfParams
{
  UnitVector mean;
  double kappa = 0.0;
};

/// N(mean, sigma2 * I).
struct IsoGaussianParams
{
  Eigen::VectorXd mean;
  double sigma2 = 1.0;
};

/// ln I_nu(x) for nu >= 0, x > 0. Throws DomainError otherwise.
double log_bessel_i(double nu, double x);

/// ln C_h(kappa), the vMF normalizing constant on S^{h-1}; the uniform
/// log-density at kappa = 0.
double vmf_log_normalizer(Eigen::Index h, double kappa);

/// -ln |S^{h-1}|.
double log_uniform_sphere_density(Eigen::Index h);

double vmf_log_density(const UnitVector& x, const VmfParams& params);

/// Exact draw: rejection sampling of w = mean.x, then a uniform direction in the
/// orthogonal complement, reflected onto the mean.
UnitVector vmf_sample(const VmfParams& params, Rng& rng);

/// Mean resultant length E[mean.x] = I_{h/2}(kappa) / I_{h/2-1}(kappa).
double vmf_mean_resultant_length(Eigen::Index h, double kappa);

double gaussian_iso_log_density(const Eigen::Ref<const Eigen::VectorXd>& y,
                                const IsoGaussianParams& params);

/// Density of |C| for C ~ Cauchy(0, scale); -inf for s <= 0.
double half_cauchy_log_density(double s, double scale);

/// Gamma(shape, rate) log-density; -inf for k <= 0.
double gamma_log_density(double k, double shape, double rate);

UnitVector sample_uniform_sphere(Eigen::Index h, Rng& rng);

Eigen::VectorXd sample_standard_normal(Eigen::Index n, Rng& rng);

}  // namespace bayesio
