#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "bayesio/datagen.hpp"
#include "bayesio/geometry.hpp"
#include "bayesio/random.hpp"

namespace bayesio
{

struct ChainConfig
{
  std::size_t n_chains = 4;
  /// Iterations between PSRF checks.
  std::size_t block_size = 10000;
  std::size_t max_iters = 100000;
  double warmup_fraction = 0.25;
  double psrf_threshold = 1.1;
  std::pair<double, double> target_accept{0.25, 0.40};
  std::uint64_t seed = 0;
  /// Iterations between proposal updates while adapting.
  std::size_t adapt_interval = 100;
  /// Run chains on separate threads. Results do not depend on this.
  bool parallel = true;

  void validate() const;
};

/// Hyperparameters of the nuisance priors: half-Cauchy on sigma and
/// Gamma(shape, rate) on kappa.
struct Priors
{
  double half_cauchy_scale = 1.0;
  double gamma_shape = 2.0;
  double gamma_rate = 0.1;
};

/// Post-warm-up output of one chain.
struct Trace
{
  Eigen::MatrixXd theta;  // h x T, one sample per column
  Eigen::VectorXd nuisance;  // sigma (decision) or kappa (objective)
  std::vector<std::uint8_t> accepted_theta;
  std::vector<std::uint8_t> accepted_nuisance;
  Eigen::MatrixXd proposal_cov_final;
  /// 1-based iteration number of column 0.
  std::size_t first_iteration = 1;

  std::size_t size() const noexcept { return static_cast<std::size_t>(theta.cols()); }
  double theta_acceptance_rate() const;
  double nuisance_acceptance_rate() const;
};

struct ChainSetResult
{
  std::vector<Trace> chains;
  /// Iterations per chain, warm-up included.
  std::size_t iterations = 0;
  std::size_t warmup = 0;
  double psrf = 0.0;
  bool converged = false;
  /// Summed sampling time of all chains, as if run one after another.
  double wall_clock_s = 0.0;

  /// Post-warm-up samples of every chain, concatenated in chain order.
  Eigen::MatrixXd pooled_theta() const;
};

/// Gaussian random-walk proposal projected back to the sphere. The proposal
/// ratio is treated as 1.
class ProposalKernel
{
public:
  explicit ProposalKernel(const Eigen::MatrixXd& cov);

  UnitVector propose(const UnitVector& current, Rng& rng) const;
  const Eigen::MatrixXd& covariance() const noexcept { return cov_; }

private:
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd factor_;
};

UnitVector propose_theta(const UnitVector& current, const Eigen::MatrixXd& cov, Rng& rng);

/// (2.38^2 / h) (Cov(history) + 1e-8 I) for samples stored one per column.
Eigen::MatrixXd adapt_covariance(const Eigen::Ref<const Eigen::MatrixXd>& history);

/// Gelman-Rubin potential scale reduction for one scalar parameter; column j
/// of `draws` holds chain j.
double psrf(const Eigen::Ref<const Eigen::MatrixXd>& draws);

/// Maximum PSRF over the theta coordinates and the log nuisance parameter.
double max_psrf(const std::vector<Trace>& chains);

/// Gaussian decision-space likelihood with unknown sigma. The theta statistic
/// is the summed squared residual over all observations, which costs N forward
/// solves; sigma moves reuse it.
class DecisionModel
{
public:
  DecisionModel(const Dataset& data, const Priors& priors);

  Eigen::Index dimension() const noexcept { return h_; }
  std::size_t size() const noexcept { return n_obs_; }

  double statistic(const Eigen::Ref<const Eigen::VectorXd>& theta);
  double log_normalizer(double sigma) const;
  double data_term(double statistic, double sigma) const;
  double log_prior(double sigma) const;
  double initial_nuisance() const noexcept { return priors_.half_cauchy_scale; }

  /// Sum_i ln f(y_i | x*(u_i, theta)), evaluated directly.
  double log_likelihood(const Eigen::Ref<const Eigen::VectorXd>& theta, double sigma);

private:
  struct QpStack;

  std::shared_ptr<const Dataset> data_;
  std::shared_ptr<const QpStack> qp_;
  Eigen::VectorXd workspace_;
  Priors priors_;
  Eigen::Index h_ = 0;
  std::size_t n_obs_ = 0;
};

/// vMF objective-space likelihood with unknown kappa over directions recovered
/// once from the observations. Depends on the data only through their sum.
class ObjectiveModel
{
public:
  ObjectiveModel(const Dataset& data, const Priors& priors);
  ObjectiveModel(const std::vector<UnitVector>& recovered, Eigen::Index h, const Priors& priors);

  Eigen::Index dimension() const noexcept { return h_; }
  std::size_t size() const noexcept { return n_obs_; }
  const Eigen::VectorXd& resultant() const noexcept { return resultant_; }
  const std::vector<UnitVector>& recovered() const noexcept { return recovered_; }

  double statistic(const Eigen::Ref<const Eigen::VectorXd>& theta) const;
  double log_normalizer(double kappa) const;
  double data_term(double statistic, double kappa) const;
  double log_prior(double kappa) const;
  double initial_nuisance() const noexcept { return priors_.gamma_shape / priors_.gamma_rate; }

  /// Sum_i vmf_log_density(theta~_i | theta, kappa), evaluated term by term.
  double log_likelihood(const Eigen::Ref<const Eigen::VectorXd>& theta, double kappa) const;

private:
  std::vector<UnitVector> recovered_;
  Eigen::VectorXd resultant_;
  Priors priors_;
  Eigen::Index h_ = 0;
  std::size_t n_obs_ = 0;
};

/// One Metropolis-within-Gibbs chain: a theta move followed by a log-scale
/// random-walk move on the nuisance parameter each iteration. The proposal is
/// adapted during the first `warmup_fraction * block_size` iterations and
/// frozen afterwards: scale only for the first half of that period, then
/// scale and empirical covariance.
template <typename Model>
class MetropolisChain
{
public:
  MetropolisChain(Model model, const ChainConfig& cfg, std::uint64_t seed);

  /// Runs until `total` iterations have been made.
  void advance_to(std::size_t total);

  /// Samples from iteration warmup + 1 through the current one.
  Trace trace(std::size_t warmup) const;

  std::size_t iterations() const noexcept { return iteration_; }
  const UnitVector& theta() const noexcept { return theta_; }
  double nuisance() const noexcept { return nuisance_; }
  double cached_statistic() const noexcept { return statistic_; }
  const Eigen::MatrixXd& proposal_covariance() const noexcept { return kernel_.covariance(); }
  Model& model() noexcept { return model_; }
  double elapsed_seconds() const noexcept { return elapsed_s_; }

private:
  void step();
  void adapt();

  Model model_;
  ChainConfig cfg_;
  Rng rng_;
  Eigen::Index h_;
  std::size_t adapt_end_;

  UnitVector theta_;
  double nuisance_;
  double statistic_;
  double log_norm_;
  ProposalKernel kernel_;
  double cov_scale_ = 1.0;
  double nuisance_step_ = 0.1;

  std::size_t iteration_ = 0;
  std::vector<double> theta_history_;
  std::vector<double> nuisance_history_;
  std::vector<std::uint8_t> accepted_theta_;
  std::vector<std::uint8_t> accepted_nuisance_;
  double elapsed_s_ = 0.0;
};

extern template class MetropolisChain<DecisionModel>;
extern template class MetropolisChain<ObjectiveModel>;

/// Runs cfg.n_chains chains in blocks of cfg.block_size iterations until the
/// maximum PSRF over post-warm-up samples drops below the threshold or
/// cfg.max_iters is reached (converged stays false in that case).
ChainSetResult run_chain_decision(const Dataset& data, const ChainConfig& cfg,
                                  const Priors& priors = {});

/// Recovers theta~_i for every observation, then samples theta and kappa
/// with no optimization inside the loop.
ChainSetResult run_chain_objective(const Dataset& data, const ChainConfig& cfg,
                                   const Priors& priors = {});

/// Seed of chain `index` under master seed `master`.
std::uint64_t chain_seed(std::uint64_t master, std::size_t index) noexcept;

}  // namespace bayesio
