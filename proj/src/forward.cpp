#include "bayesio/forward.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>

#include <cmath>
#include <limits>

#include "bayesio/distributions.hpp"

namespace bayesio
{

QpInstance::QpInstance(Eigen::MatrixXd Q) : Q_(std::move(Q))
{
  if (Q_.rows() != Q_.cols() || Q_.rows() == 0)
    throw Error(ErrorKind::InvalidArgument, "Q must be a non-empty square matrix");
  if ((Q_ - Q_.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw Error(ErrorKind::InvalidArgument, "Q must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(Q_);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::NotPositiveDefinite, "Cholesky factorization of Q failed");
  const Eigen::Index n = Q_.rows();
  Q_inv_ = llt.solve(Eigen::MatrixXd::Identity(n, n));
  Q_inv_ = (0.5 * (Q_inv_ + Q_inv_.transpose())).eval();
  const Eigen::VectorXd q_inv_e = Q_inv_.rowwise().sum();
  center_ = -0.5 * q_inv_e;
  radius_sq_ = 1.0 + 0.25 * q_inv_e.sum();
}

double QpInstance::constraint_residual(const Eigen::Ref<const Eigen::VectorXd>& x) const
{
  return x.dot(Q_ * x) + x.sum() - 1.0;
}

void qp_minimizer(const QpInstance& inst, const Eigen::Ref<const Eigen::VectorXd>& theta,
                  Eigen::Ref<Eigen::VectorXd> out)
{
  out.noalias() = inst.Q_inverse() * theta;
  const double curvature = theta.dot(out);
  if (!(curvature > 0.0))
    throw Error(ErrorKind::ZeroVector, "solve_qp: theta must be nonzero");
  const double mu = std::sqrt(inst.radius_sq() / curvature);
  out = inst.center() - mu * out;
}

ForwardSolution solve_qp(const QpInstance& inst, const Eigen::Ref<const Eigen::VectorXd>& theta)
{
  if (theta.size() != inst.n())
    throw Error(ErrorKind::InvalidArgument, "solve_qp: dimension mismatch");
  ForwardSolution sol;
  sol.x_star.resize(inst.n());
  qp_minimizer(inst, theta, sol.x_star);
  sol.objective = theta.dot(sol.x_star);
  sol.active_set.push_back({ConstraintKind::Ellipsoid, 0});
  return sol;
}

namespace
{

enum class VarStatus : unsigned char
{
  Basic,
  AtLower,
  AtUpper,
};

constexpr double kFeasTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr int kDegenerateBeforeBland = 50;

// Variables 0..n-1 are x (bounds [-1, 1], cost theta); n..n+m-1 are the row
// surpluses s = A x - b (bounds [0, inf), cost 0). Rows read A x - s = b.
class DualSimplex
{
public:
  DualSimplex(const LpInstance& inst, const Eigen::Ref<const Eigen::VectorXd>& theta)
      : inst_(inst), n_(inst.n()), m_(inst.m()), total_(n_ + m_)
  {
    lower_.resize(total_);
    upper_.resize(total_);
    lower_.head(n_).setConstant(-1.0);
    upper_.head(n_).setConstant(1.0);
    lower_.tail(m_).setZero();
    upper_.tail(m_).setConstant(std::numeric_limits<double>::infinity());

    // Slack basis: B = -I, so B^{-1}[A, -I] = [-A, I] and B^{-1} b = -b.
    tableau_.resize(m_, total_);
    tableau_.leftCols(n_) = -inst.A;
    tableau_.rightCols(m_).setIdentity();
    rhs_ = -inst.b;

    reduced_.setZero(total_);
    reduced_.head(n_) = theta;
    status_.assign(static_cast<std::size_t>(total_), VarStatus::Basic);
    value_.setZero(total_);
    for (Eigen::Index j = 0; j < n_; ++j) {
      const bool up = theta[j] < 0.0;
      status_[j] = up ? VarStatus::AtUpper : VarStatus::AtLower;
      value_[j] = up ? 1.0 : -1.0;
    }
    basis_.resize(m_);
    for (Eigen::Index i = 0; i < m_; ++i)
      basis_[i] = n_ + i;
  }

  Eigen::VectorXd run()
  {
    const Eigen::Index max_iters = 50 * (total_ + 1);
    int degenerate_run = 0;
    for (Eigen::Index iter = 0; iter < max_iters; ++iter) {
      update_basic_values();
      const Eigen::Index row = choose_leaving(degenerate_run >= kDegenerateBeforeBland);
      if (row < 0)
        return extract_solution();
      const double ratio = pivot(row);
      degenerate_run = ratio < 1e-12 ? degenerate_run + 1 : 0;
    }
    throw Error(ErrorKind::DomainError, "solve_lp: simplex iteration limit reached");
  }

private:
  void update_basic_values()
  {
    Eigen::VectorXd nonbasic = value_;
    for (Eigen::Index i = 0; i < m_; ++i)
      nonbasic[basis_[i]] = 0.0;
    const Eigen::VectorXd basic = rhs_ - tableau_ * nonbasic;
    for (Eigen::Index i = 0; i < m_; ++i)
      value_[basis_[i]] = basic[i];
  }

  double violation(Eigen::Index var) const
  {
    const double v = value_[var];
    if (v < lower_[var] - kFeasTol)
      return lower_[var] - v;
    if (v > upper_[var] + kFeasTol)
      return v - upper_[var];
    return 0.0;
  }

  // Largest violation, ties (and Bland mode) resolved by smallest variable index.
  Eigen::Index choose_leaving(bool bland) const
  {
    Eigen::Index best_row = -1;
    double best = 0.0;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double viol = violation(basis_[i]);
      if (viol <= 0.0)
        continue;
      if (best_row < 0) {
        best_row = i;
        best = viol;
        continue;
      }
      const bool smaller_index = basis_[i] < basis_[best_row];
      if (bland) {
        if (smaller_index)
          best_row = i;
      } else if (viol > best || (viol == best && smaller_index)) {
        best_row = i;
        best = viol;
      }
    }
    return best_row;
  }

  double pivot(Eigen::Index row)
  {
    const Eigen::Index leaving = basis_[row];
    const bool below = value_[leaving] < lower_[leaving];
    const Eigen::RowVectorXd alpha = tableau_.row(row);

    Eigen::Index entering = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < total_; ++j) {
      if (status_[j] == VarStatus::Basic)
        continue;
      const double a = alpha[j];
      const bool at_lower = status_[j] == VarStatus::AtLower;
      const bool eligible = below ? (at_lower ? a < -kPivotTol : a > kPivotTol)
                                  : (at_lower ? a > kPivotTol : a < -kPivotTol);
      if (!eligible)
        continue;
      const double ratio = std::abs(reduced_[j]) / std::abs(a);
      if (ratio < best_ratio - 1e-12) {
        best_ratio = ratio;
        entering = j;
      }
    }
    if (entering < 0)
      throw Error(ErrorKind::Infeasible, "solve_lp: feasible region is empty");

    const double a_q = alpha[entering];
    tableau_.row(row) /= a_q;
    rhs_[row] /= a_q;
    const Eigen::RowVectorXd pivot_row = tableau_.row(row);
    const Eigen::VectorXd column = tableau_.col(entering);
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (i == row || column[i] == 0.0)
        continue;
      tableau_.row(i) -= column[i] * pivot_row;
      rhs_[i] -= column[i] * rhs_[row];
    }
    reduced_ -= reduced_[entering] * pivot_row.transpose();
    reduced_[entering] = 0.0;

    status_[leaving] = below ? VarStatus::AtLower : VarStatus::AtUpper;
    value_[leaving] = below ? lower_[leaving] : upper_[leaving];
    status_[entering] = VarStatus::Basic;
    basis_[row] = entering;
    return best_ratio;
  }

  // Re-solves the n defining equations of the final vertex from the original
  // data, which removes round-off accumulated in the tableau.
  Eigen::VectorXd extract_solution() const
  {
    Eigen::VectorXd tableau_x = value_.head(n_);
    Eigen::MatrixXd system(n_, n_);
    Eigen::VectorXd target(n_);
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < total_ && k < n_; ++j) {
      if (status_[j] == VarStatus::Basic)
        continue;
      if (j < n_) {
        system.row(k).setZero();
        system(k, j) = 1.0;
        target[k] = value_[j];
      } else {
        system.row(k) = inst_.A.row(j - n_);
        target[k] = inst_.b[j - n_];
      }
      ++k;
    }
    if (k != n_)
      return tableau_x;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
    if (!lu.isInvertible())
      return tableau_x;
    Eigen::VectorXd x = lu.solve(target);
    if (max_infeasibility(x) > max_infeasibility(tableau_x) + 1e-12)
      return tableau_x;
    return x;
  }

  double max_infeasibility(const Eigen::VectorXd& x) const
  {
    double worst = ((x.array().abs() - 1.0).maxCoeff());
    if (m_ > 0)
      worst = std::max(worst, (inst_.b - inst_.A * x).maxCoeff());
    return std::max(worst, 0.0);
  }

  const LpInstance& inst_;
  Eigen::Index n_;
  Eigen::Index m_;
  Eigen::Index total_;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
  Eigen::MatrixXd tableau_;
  Eigen::VectorXd rhs_;
  Eigen::VectorXd reduced_;
  Eigen::VectorXd value_;
  std::vector<VarStatus> status_;
  std::vector<Eigen::Index> basis_;
};

}  // namespace

ForwardSolution solve_lp(const LpInstance& inst, const Eigen::Ref<const Eigen::VectorXd>& theta)
{
  if (theta.size() != inst.n() || inst.b.size() != inst.m())
    throw Error(ErrorKind::InvalidArgument, "solve_lp: dimension mismatch");
  if (!theta.allFinite())
    throw Error(ErrorKind::InvalidArgument, "solve_lp: theta must be finite");

  ForwardSolution sol;
  sol.x_star = DualSimplex(inst, theta).run();
  sol.objective = theta.dot(sol.x_star);

  const Eigen::VectorXd slack = inst.A * sol.x_star - inst.b;
  for (Eigen::Index j = 0; j < inst.m(); ++j)
    if (std::abs(slack[j]) <= kActiveTolerance)
      sol.active_set.push_back({ConstraintKind::Row, j});
  for (Eigen::Index k = 0; k < inst.n(); ++k) {
    if (std::abs(sol.x_star[k] + 1.0) <= kActiveTolerance)
      sol.active_set.push_back({ConstraintKind::LowerBound, k});
    else if (std::abs(sol.x_star[k] - 1.0) <= kActiveTolerance)
      sol.active_set.push_back({ConstraintKind::UpperBound, k});
  }
  return sol;
}

ForwardSolution solve(const ForwardInstance& inst, const Eigen::Ref<const Eigen::VectorXd>& theta)
{
  return std::visit(
      [&](const auto& concrete) -> ForwardSolution {
        using T = std::decay_t<decltype(concrete)>;
        if constexpr (std::is_same_v<T, LpInstance>)
          return solve_lp(concrete, theta);
        else
          return solve_qp(concrete, theta);
      },
      inst);
}

Eigen::Index dimension(const ForwardInstance& inst)
{
  return std::visit([](const auto& concrete) { return concrete.n(); }, inst);
}

LpInstance generate_lp_instance(Eigen::Index n, Eigen::Index m, Rng& rng)
{
  if (n < 2 || m < 1)
    throw Error(ErrorKind::InvalidArgument, "generate_lp_instance requires n >= 2, m >= 1");
  std::uniform_real_distribution<double> scale(0.7, 1.4);
  std::uniform_real_distribution<double> interior(-0.72, 0.72);
  std::uniform_real_distribution<double> margin(0.04, 0.28);

  LpInstance inst;
  inst.A.resize(m, n);
  for (Eigen::Index j = 0; j < m; ++j) {
    const UnitVector dir = sample_uniform_sphere(n, rng);
    inst.A.row(j) = scale(rng) * dir.coords().transpose();
  }
  Eigen::VectorXd w(n);
  for (Eigen::Index k = 0; k < n; ++k)
    w[k] = interior(rng);
  Eigen::VectorXd delta(m);
  for (Eigen::Index j = 0; j < m; ++j)
    delta[j] = margin(rng);
  inst.b = inst.A * w - delta;
  return inst;
}

QpInstance generate_qp_instance(Eigen::Index n, Rng& rng)
{
  if (n < 1)
    throw Error(ErrorKind::InvalidArgument, "generate_qp_instance requires n >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> eigen(1.0, 5.0);

  Eigen::MatrixXd gaussian(n, n);
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index r = 0; r < n; ++r)
      gaussian(r, c) = normal(rng);
  const Eigen::MatrixXd V = Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian).householderQ();
  Eigen::VectorXd lambda(n);
  for (Eigen::Index i = 0; i < n; ++i)
    lambda[i] = eigen(rng);
  Eigen::MatrixXd Q = V.transpose() * lambda.asDiagonal() * V;
  Q = (0.5 * (Q + Q.transpose())).eval();
  return QpInstance(std::move(Q));
}

}  // namespace bayesio
