#pragma once

#include <Eigen/Core>

#include "bayesio/forward.hpp"
#include "bayesio/geometry.hpp"

namespace bayesio
{

struct Observation
{
  ForwardInstance instance;
  Eigen::VectorXd y;
};

/// Residual tolerance used to decide which constraints are active at an
/// observed decision.
inline constexpr double kRecoveryTolerance = 1e-6;

/// Direction in the normal cone at a boundary point y of the LP feasible set:
/// the normalized equal-weight sum of a_j over active rows, +e_k over active
/// lower faces and -e_k over active upper faces. Minimizing along the result
/// keeps y on the optimal face.
UnitVector recover_theta_lp(const LpInstance& inst, const Eigen::Ref<const Eigen::VectorXd>& y);

/// normalize(-2Qy - e) for y on the ellipsoid boundary.
UnitVector recover_theta_qp(const QpInstance& inst, const Eigen::Ref<const Eigen::VectorXd>& y);

UnitVector recover_theta(const ForwardInstance& inst, const Eigen::Ref<const Eigen::VectorXd>& y);

/// ||y - x*(u, theta)|| for the solver's deterministic selection from the
/// optimal set. Exact for the QP; an upper bound when an LP optimum is a face.
double decision_loss(const Observation& obs, const Eigen::Ref<const Eigen::VectorXd>& theta);

/// theta'y - theta'x*(u, theta).
double suboptimality_loss(const Observation& obs, const Eigen::Ref<const Eigen::VectorXd>& theta);

}  // namespace bayesio
