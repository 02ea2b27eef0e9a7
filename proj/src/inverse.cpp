#include "bayesio/inverse.hpp"

#include <cmath>

namespace bayesio
{

UnitVector recover_theta_lp(const LpInstance& inst, const Eigen::Ref<const Eigen::VectorXd>& y)
{
  if (y.size() != inst.n())
    throw Error(ErrorKind::InvalidArgument, "recover_theta_lp: dimension mismatch");

  Eigen::VectorXd cone = Eigen::VectorXd::Zero(inst.n());
  int active = 0;
  const Eigen::VectorXd slack = inst.A * y - inst.b;
  for (Eigen::Index j = 0; j < inst.m(); ++j) {
    if (std::abs(slack[j]) <= kRecoveryTolerance) {
      cone += inst.A.row(j).transpose();
      ++active;
    }
  }
  for (Eigen::Index k = 0; k < inst.n(); ++k) {
    if (std::abs(y[k] + 1.0) <= kRecoveryTolerance) {
      cone[k] += 1.0;
      ++active;
    } else if (std::abs(y[k] - 1.0) <= kRecoveryTolerance) {
      cone[k] -= 1.0;
      ++active;
    }
  }
  if (active == 0)
    throw Error(ErrorKind::InteriorPoint, "recover_theta_lp: no active constraint at y");
  if (cone.norm() < 1e-12)
    throw Error(ErrorKind::ZeroCone, "recover_theta_lp: active normals cancel");
  return normalize(cone);
}

UnitVector recover_theta_qp(const QpInstance& inst, const Eigen::Ref<const Eigen::VectorXd>& y)
{
  if (y.size() != inst.n())
    throw Error(ErrorKind::InvalidArgument, "recover_theta_qp: dimension mismatch");
  if (std::abs(inst.constraint_residual(y)) > kRecoveryTolerance)
    throw Error(ErrorKind::OffBoundary, "recover_theta_qp: y is not on the ellipsoid boundary");
  const Eigen::VectorXd normal = -2.0 * (inst.Q() * y) - Eigen::VectorXd::Ones(inst.n());
  return normalize(normal);
}

UnitVector recover_theta(const ForwardInstance& inst, const Eigen::Ref<const Eigen::VectorXd>& y)
{
  return std::visit(
      [&](const auto& concrete) -> UnitVector {
        using T = std::decay_t<decltype(concrete)>;
        if constexpr (std::is_same_v<T, LpInstance>)
          return recover_theta_lp(concrete, y);
        else
          return recover_theta_qp(concrete, y);
      },
      inst);
}

double decision_loss(const Observation& obs, const Eigen::Ref<const Eigen::VectorXd>& theta)
{
  return (obs.y - solve(obs.instance, theta).x_star).norm();
}

double suboptimality_loss(const Observation& obs, const Eigen::Ref<const Eigen::VectorXd>& theta)
{
  const ForwardSolution sol = solve(obs.instance, theta);
  return theta.dot(obs.y) - sol.objective;
}

}  // namespace bayesio
