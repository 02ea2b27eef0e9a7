#pragma once

#include <Eigen/Core>

#include <cmath>
#include <numbers>

#include "bayesio/errors.hpp"

namespace bayesio
{

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// A point on the unit hypersphere S^{h-1}, h >= 2 (h = 1 is allowed for the
/// one-dimensional forward problems used in tests).
///
/// Only constructible through normalize() or from_unit(), so the unit-norm
/// invariant holds for every live instance.
template <typename Scalar>
class BasicUnitVector
{
public:
  using VectorType = Vector<Scalar>;

  static BasicUnitVector from_unit(VectorType v, Scalar tol = Scalar(1e-10))
  {
    if (v.size() == 0 || std::abs(v.norm() - Scalar(1)) > tol)
      throw Error(ErrorKind::InvalidArgument, "vector is not unit norm");
    return BasicUnitVector(std::move(v));
  }

  const VectorType& coords() const noexcept { return coords_; }
  operator const VectorType&() const noexcept { return coords_; }
  Eigen::Index size() const noexcept { return coords_.size(); }
  Scalar operator[](Eigen::Index i) const { return coords_[i]; }

  Scalar dot(const BasicUnitVector& other) const { return coords_.dot(other.coords_); }

  friend bool operator==(const BasicUnitVector& a, const BasicUnitVector& b)
  {
    return a.coords_ == b.coords_;
  }

private:
  template <typename Derived>
  friend BasicUnitVector<typename Derived::Scalar> normalize(const Eigen::MatrixBase<Derived>& v);

  explicit BasicUnitVector(VectorType v) : coords_(std::move(v)) {}

  VectorType coords_;
};

using UnitVector = BasicUnitVector<double>;

/// Point eta of the affine tangent plane {v : (v - base).base = 0}.
template <typename Scalar>
struct BasicTangentPoint
{
  BasicUnitVector<Scalar> base;
  Vector<Scalar> point;
};

using TangentPoint = BasicTangentPoint<double>;

template <typename Derived>
BasicUnitVector<typename Derived::Scalar> normalize(const Eigen::MatrixBase<Derived>& v)
{
  using Scalar = typename Derived::Scalar;
  const Scalar norm = v.norm();
  if (!(norm >= Scalar(1e-300)))
    throw Error(ErrorKind::ZeroVector, "cannot normalize a zero vector");
  Vector<Scalar> out = v / norm;
  // One more pass removes the last-ulp drift of the first division.
  out /= out.norm();
  return BasicUnitVector<Scalar>(std::move(out));
}

/// Angle between two unit vectors, in radians, in [0, pi]. Equal to
/// arccos(a.b); the half-chord form keeps full precision near 0 and pi.
template <typename Scalar>
Scalar geodesic_distance(const BasicUnitVector<Scalar>& a, const BasicUnitVector<Scalar>& b)
{
  const auto& x = a.coords();
  const auto& y = b.coords();
  return Scalar(2) * std::atan2((x - y).norm(), (x + y).norm());
}

/// Logarithmic map into the affine tangent plane at `base`. The returned point
/// sits at Euclidean distance geodesic_distance(base, theta) from base.
template <typename Scalar>
BasicTangentPoint<Scalar> log_map(const BasicUnitVector<Scalar>& base,
                                  const BasicUnitVector<Scalar>& theta)
{
  const auto& p = base.coords();
  const auto& x = theta.coords();
  const Scalar angle = geodesic_distance(base, theta);
  if (angle >= std::numbers::pi_v<Scalar> - Scalar(1e-9))
    throw Error(ErrorKind::AntipodalPoint, "log map undefined at the antipode");

  Vector<Scalar> tangential = x - p.dot(x) * p;
  const Scalar tnorm = tangential.norm();
  if (angle == Scalar(0) || tnorm == Scalar(0) || p == x)
    return {base, p};
  return {base, p + tangential * (angle / tnorm)};
}

/// Applies the Householder reflection that maps the pole e_h onto `mean`.
/// The reflection is its own inverse.
template <typename Derived>
Vector<typename Derived::Scalar> reflect_to(const Eigen::MatrixBase<Derived>& pole_sample,
                                            const BasicUnitVector<typename Derived::Scalar>& mean)
{
  using Scalar = typename Derived::Scalar;
  Vector<Scalar> u = -mean.coords();
  u[u.size() - 1] += Scalar(1);
  const Scalar unorm = u.norm();
  if (unorm == Scalar(0))
    return pole_sample;
  u /= unorm;
  return pole_sample - Scalar(2) * u.dot(pole_sample) * u;
}

}  // namespace bayesio
