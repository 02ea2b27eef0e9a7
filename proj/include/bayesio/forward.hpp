#pragma once

#include <Eigen/Core>

#include <variant>
#include <vector>

#include "bayesio/geometry.hpp"
#include "bayesio/random.hpp"

namespace bayesio
{

/// minimize theta.x  s.t.  A x >= b,  -1 <= x <= 1.
struct LpInstance
{
  Eigen::MatrixXd A;  // m x n
  Eigen::VectorXd b;  // m

  Eigen::Index n() const noexcept { return A.cols(); }
  Eigen::Index m() const noexcept { return A.rows(); }
};

/// minimize theta.x  s.t.  x'Qx + e'x <= 1, with Q symmetric positive definite.
///
/// Q^{-1}, the ellipsoid center c = -Q^{-1}e/2 and the squared radius
/// 1 + e'Q^{-1}e/4 are computed once at construction.
class QpInstance
{
public:
  explicit QpInstance(Eigen::MatrixXd Q);

  const Eigen::MatrixXd& Q() const noexcept { return Q_; }
  const Eigen::MatrixXd& Q_inverse() const noexcept { return Q_inv_; }
  const Eigen::VectorXd& center() const noexcept { return center_; }
  double radius_sq() const noexcept { return radius_sq_; }
  Eigen::Index n() const noexcept { return Q_.rows(); }

  /// x'Qx + e'x - 1.
  double constraint_residual(const Eigen::Ref<const Eigen::VectorXd>& x) const;

private:
  Eigen::MatrixXd Q_;
  Eigen::MatrixXd Q_inv_;
  Eigen::VectorXd center_;
  double radius_sq_ = 1.0;
};

using ForwardInstance = std::variant<LpInstance, QpInstance>;

enum class ConstraintKind
{
  Row,         // a_j' x >= b_j
  LowerBound,  // x_k >= -1
  UpperBound,  // x_k <= 1
  Ellipsoid,   // x'Qx + e'x <= 1
};

struct ActiveConstraint
{
  ConstraintKind kind;
  Eigen::Index index;

  friend bool operator==(const ActiveConstraint&, const ActiveConstraint&) = default;
};

struct ForwardSolution
{
  Eigen::VectorXd x_star;
  double objective = 0.0;
  std::vector<ActiveConstraint> active_set;
};

inline constexpr double kActiveTolerance = 1e-8;

/// Bounded-variable dual simplex started from the optimal box corner. Pivoting
/// is deterministic, so ties between optimal vertices resolve the same way for
/// identical inputs.
ForwardSolution solve_lp(const LpInstance& inst, const Eigen::Ref<const Eigen::VectorXd>& theta);

/// Closed-form KKT solution x = c - mu Q^{-1} theta with the ellipsoid active.
ForwardSolution solve_qp(const QpInstance& inst, const Eigen::Ref<const Eigen::VectorXd>& theta);

/// Writes only the minimizer into `out`; no allocation. Used inside MCMC loops.
void qp_minimizer(const QpInstance& inst, const Eigen::Ref<const Eigen::VectorXd>& theta,
                  Eigen::Ref<Eigen::VectorXd> out);

ForwardSolution solve(const ForwardInstance& inst, const Eigen::Ref<const Eigen::VectorXd>& theta);

Eigen::Index dimension(const ForwardInstance& inst);

LpInstance generate_lp_instance(Eigen::Index n, Eigen::Index m, Rng& rng);

QpInstance generate_qp_instance(Eigen::Index n, Rng& rng);

}  // namespace bayesio
