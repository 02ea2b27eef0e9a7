#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "bayesio/errors.hpp"
#include "bayesio/geometry.hpp"

namespace bayesio
{

/// Mahalanobis ellipsoid in the tangent plane at the posterior mean direction.
/// theta belongs to the region when its log-map image lies inside.
template <typename Scalar>
struct BasicCredibleRegion
{
  BasicUnitVector<Scalar> mean_dir;
  Vector<Scalar> tangent_mean;
  Matrix<Scalar> cov;  // regularized
  Scalar q = 0;
  Scalar alpha = 0;
  Scalar epsilon = 0;
};

using CredibleRegion = BasicCredibleRegion<double>;

namespace detail
{

template <typename Scalar>
BasicUnitVector<Scalar> column_as_unit(const Matrix<Scalar>& samples,
                                       Eigen::Index t)
{
  return BasicUnitVector<Scalar>::from_unit(samples.col(t),
                                            std::sqrt(std::numeric_limits<Scalar>::epsilon()));
}

template <typename Scalar>
Matrix<Scalar> stack_columns(const std::vector<BasicUnitVector<Scalar>>& samples)
{
  if (samples.empty())
    return {};
  Matrix<Scalar> out(samples.front().size(), static_cast<Eigen::Index>(samples.size()));
  for (std::size_t t = 0; t < samples.size(); ++t) {
    if (samples[t].size() != out.rows())
      throw Error(ErrorKind::InvalidArgument, "samples differ in dimension");
    out.col(static_cast<Eigen::Index>(t)) = samples[t].coords();
  }
  return out;
}

/// Log-map images of every column at `base`, one per column.
template <typename Scalar>
Matrix<Scalar> tangent_points(const BasicUnitVector<Scalar>& base,
                              const Matrix<Scalar>& samples)
{
  Matrix<Scalar> eta(samples.rows(), samples.cols());
  for (Eigen::Index t = 0; t < samples.cols(); ++t)
    eta.col(t) = log_map(base, column_as_unit<Scalar>(samples, t)).point;
  return eta;
}

/// Squared Mahalanobis norm of `diff` under the Cholesky factor `llt`. Shared
/// by fitting and membership so a sample at the quantile stays inside.
template <typename Scalar>
Scalar mahalanobis_sq(const Eigen::LLT<Matrix<Scalar>>& llt, const Vector<Scalar>& diff)
{
  return llt.matrixL().solve(diff).squaredNorm();
}

/// Empirical covariance with denominator T.
template <typename Scalar>
Matrix<Scalar> covariance_t(const Matrix<Scalar>& eta, const Vector<Scalar>& mean)
{
  const Matrix<Scalar> centered = eta.colwise() - mean;
  return centered * centered.transpose() / static_cast<Scalar>(eta.cols());
}

}  // namespace detail

/// normalize(mean of samples), samples stored one per column.
template <typename Scalar>
BasicUnitVector<Scalar> posterior_mean_direction(const Matrix<Scalar>& samples)
{
  if (samples.cols() < 1)
    throw Error(ErrorKind::TooFewSamples, "posterior_mean_direction needs a sample");
  const Vector<Scalar> mean = samples.rowwise().mean();
  if (!(mean.norm() > Scalar(1e-12)))
    throw Error(ErrorKind::ZeroResultant, "samples have zero resultant");
  return normalize(mean);
}

template <typename Scalar>
BasicUnitVector<Scalar> posterior_mean_direction(const std::vector<BasicUnitVector<Scalar>>& samples)
{
  const Matrix<Scalar> stacked = detail::stack_columns(samples);
  return posterior_mean_direction<Scalar>(stacked);
}

/// Region at level 1 - alpha. The tangent covariance is regularized by
/// epsilon I; the default epsilon is 1e-10 max(1, tr(Sigma) / h). q is the
/// ceil((1 - alpha) T)-th smallest squared Mahalanobis distance, so at least
/// that many samples lie inside.
template <typename Scalar>
BasicCredibleRegion<Scalar> fit_region(const Matrix<Scalar>& samples,
                                       Scalar alpha, std::optional<Scalar> epsilon = std::nullopt)
{
  const Eigen::Index h = samples.rows();
  const Eigen::Index T = samples.cols();
  if (!(alpha > Scalar(0) && alpha < Scalar(1)))
    throw Error(ErrorKind::InvalidArgument, "alpha must lie in (0, 1)");
  if (T < h + 1)
    throw Error(ErrorKind::TooFewSamples, "fit_region needs at least h + 1 samples");

  const BasicUnitVector<Scalar> mean_dir = posterior_mean_direction<Scalar>(samples);
  const Matrix<Scalar> eta = detail::tangent_points<Scalar>(mean_dir, samples);
  const Vector<Scalar> eta_bar = eta.rowwise().mean();
  Matrix<Scalar> cov = detail::covariance_t<Scalar>(eta, eta_bar);

  const Scalar eps =
      epsilon ? *epsilon : Scalar(1e-10) * std::max(Scalar(1), cov.trace() / static_cast<Scalar>(h));
  if (!(eps > Scalar(0)))
    throw Error(ErrorKind::InvalidArgument, "epsilon must be positive");
  cov.diagonal().array() += eps;

  const Eigen::LLT<Matrix<Scalar>> llt(cov);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::NotPositiveDefinite, "regularized tangent covariance");
  std::vector<Scalar> d(static_cast<std::size_t>(T));
  for (Eigen::Index t = 0; t < T; ++t)
    d[static_cast<std::size_t>(t)] = detail::mahalanobis_sq<Scalar>(llt, eta.col(t) - eta_bar);

  // The small slack keeps e.g. 0.95 * 100 from rounding up to 96.
  const auto rank = std::clamp<Eigen::Index>(
      static_cast<Eigen::Index>(std::ceil((Scalar(1) - alpha) * static_cast<Scalar>(T) - Scalar(1e-9))),
      1, T);
  std::nth_element(d.begin(), d.begin() + (rank - 1), d.end());

  return {mean_dir, eta_bar, std::move(cov), d[static_cast<std::size_t>(rank - 1)], alpha, eps};
}

template <typename Scalar>
BasicCredibleRegion<Scalar> fit_region(const std::vector<BasicUnitVector<Scalar>>& samples,
                                       Scalar alpha, std::optional<Scalar> epsilon = std::nullopt)
{
  const Matrix<Scalar> stacked = detail::stack_columns(samples);
  return fit_region<Scalar>(stacked, alpha, epsilon);
}

/// Squared Mahalanobis distance of log_map(mean_dir, theta) from the tangent
/// mean. Throws AntipodalPoint at the antipode.
template <typename Scalar>
Scalar region_distance(const BasicCredibleRegion<Scalar>& region,
                       const BasicUnitVector<Scalar>& theta)
{
  if (theta.size() != region.mean_dir.size())
    throw Error(ErrorKind::InvalidArgument, "region_distance: dimension mismatch");
  const Vector<Scalar> diff = log_map(region.mean_dir, theta).point - region.tangent_mean;
  const Eigen::LLT<Matrix<Scalar>> llt(region.cov);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::NotPositiveDefinite, "region covariance");
  return detail::mahalanobis_sq<Scalar>(llt, diff);
}

/// Antipodal points are outside every region.
template <typename Scalar>
bool region_contains(const BasicCredibleRegion<Scalar>& region, const BasicUnitVector<Scalar>& theta)
{
  try {
    return region_distance(region, theta) <= region.q;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::AntipodalPoint)
      return false;
    throw;
  }
}

/// Root-mean-square angular deviation sqrt(tr(Sigma) / (h - 1)) in radians,
/// with Sigma the unregularized tangent covariance at the mean direction.
template <typename Scalar>
Scalar alpha_rms(const Matrix<Scalar>& samples)
{
  const Eigen::Index h = samples.rows();
  if (samples.cols() < 2 || h < 2)
    throw Error(ErrorKind::TooFewSamples, "alpha_rms needs >= 2 samples in h >= 2");
  const BasicUnitVector<Scalar> mean_dir = posterior_mean_direction<Scalar>(samples);
  const Matrix<Scalar> eta = detail::tangent_points<Scalar>(mean_dir, samples);
  const Vector<Scalar> eta_bar = eta.rowwise().mean();
  const Scalar trace = (eta.colwise() - eta_bar).squaredNorm() / static_cast<Scalar>(eta.cols());
  return std::sqrt(trace / static_cast<Scalar>(h - 1));
}

template <typename Scalar>
Scalar alpha_rms(const std::vector<BasicUnitVector<Scalar>>& samples)
{
  const Matrix<Scalar> stacked = detail::stack_columns(samples);
  return alpha_rms<Scalar>(stacked);
}

template <typename Scalar>
constexpr Scalar to_degrees(Scalar radians) noexcept
{
  return radians * Scalar(180) / std::numbers::pi_v<Scalar>;
}

}  // namespace bayesio
