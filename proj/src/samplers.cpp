#include "bayesio/samplers.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <thread>

#include "bayesio/distributions.hpp"
#include "bayesio/inverse.hpp"

namespace bayesio
{

void ChainConfig::validate() const
{
  if (n_chains < 1)
    throw Error(ErrorKind::InvalidArgument, "n_chains must be >= 1");
  if (block_size < 1 || max_iters < 1 || adapt_interval < 1)
    throw Error(ErrorKind::InvalidArgument, "block_size, max_iters, adapt_interval must be >= 1");
  if (!(warmup_fraction > 0.0 && warmup_fraction < 1.0))
    throw Error(ErrorKind::InvalidArgument, "warmup_fraction must lie in (0, 1)");
  if (!(psrf_threshold > 1.0))
    throw Error(ErrorKind::InvalidArgument, "psrf_threshold must exceed 1");
  const auto [lo, hi] = target_accept;
  if (!(lo > 0.0 && lo < hi && hi < 1.0))
    throw Error(ErrorKind::InvalidArgument, "target_accept must satisfy 0 < lo < hi < 1");
}

namespace
{

double mean_of(const std::vector<std::uint8_t>& flags)
{
  if (flags.empty())
    return 0.0;
  std::size_t count = 0;
  for (auto f : flags)
    count += f;
  return static_cast<double>(count) / static_cast<double>(flags.size());
}

}  // namespace

double Trace::theta_acceptance_rate() const
{
  return mean_of(accepted_theta);
}

double Trace::nuisance_acceptance_rate() const
{
  return mean_of(accepted_nuisance);
}

Eigen::MatrixXd ChainSetResult::pooled_theta() const
{
  Eigen::Index total = 0;
  for (const auto& c : chains)
    total += c.theta.cols();
  const Eigen::Index h = chains.empty() ? 0 : chains.front().theta.rows();
  Eigen::MatrixXd pooled(h, total);
  Eigen::Index offset = 0;
  for (const auto& c : chains) {
    pooled.middleCols(offset, c.theta.cols()) = c.theta;
    offset += c.theta.cols();
  }
  return pooled;
}

// ---------------------------------------------------------------------------
// Proposal

ProposalKernel::ProposalKernel(const Eigen::MatrixXd& cov) : cov_(cov)
{
  if (cov_.rows() != cov_.cols() || cov_.rows() == 0)
    throw Error(ErrorKind::InvalidArgument, "proposal covariance must be square");
  Eigen::LLT<Eigen::MatrixXd> llt(cov_);
  if (llt.info() != Eigen::Success) {
    const double jitter = 1e-12 * std::max(1e-300, cov_.trace() / cov_.rows());
    cov_ += jitter * Eigen::MatrixXd::Identity(cov_.rows(), cov_.cols());
    llt.compute(cov_);
    if (llt.info() != Eigen::Success)
      throw Error(ErrorKind::NotPositiveDefinite, "proposal covariance is not positive definite");
  }
  factor_ = llt.matrixL();
}

UnitVector ProposalKernel::propose(const UnitVector& current, Rng& rng) const
{
  for (int attempt = 0; attempt < 2; ++attempt) {
    Eigen::VectorXd z = current.coords() + factor_ * sample_standard_normal(current.size(), rng);
    if (z.norm() >= 1e-300)
      return normalize(z);
  }
  throw Error(ErrorKind::ZeroVector, "proposal collapsed to the origin twice");
}

UnitVector propose_theta(const UnitVector& current, const Eigen::MatrixXd& cov, Rng& rng)
{
  return ProposalKernel(cov).propose(current, rng);
}

Eigen::MatrixXd adapt_covariance(const Eigen::Ref<const Eigen::MatrixXd>& history)
{
  const Eigen::Index h = history.rows();
  const Eigen::Index T = history.cols();
  if (T < 2)
    throw Error(ErrorKind::TooFewSamples, "adapt_covariance needs at least two points");
  const Eigen::VectorXd mean = history.rowwise().mean();
  const Eigen::MatrixXd centered = history.colwise() - mean;
  Eigen::MatrixXd cov = centered * centered.transpose() / static_cast<double>(T - 1);
  cov.diagonal().array() += 1e-8;
  return (2.38 * 2.38 / static_cast<double>(h)) * cov;
}

// ---------------------------------------------------------------------------
// Convergence

double psrf(const Eigen::Ref<const Eigen::MatrixXd>& draws)
{
  const Eigen::Index n = draws.rows();
  const Eigen::Index m = draws.cols();
  if (m < 2 || n < 10)
    throw Error(ErrorKind::TooFewSamples, "psrf needs >= 2 chains of length >= 10");
  const Eigen::RowVectorXd means = draws.colwise().mean();
  const double dn = static_cast<double>(n);
  const Eigen::RowVectorXd within =
      (draws.rowwise() - means).colwise().squaredNorm() / (dn - 1.0);
  const double W = within.mean();
  if (!(W > 0.0))
    throw Error(ErrorKind::DegenerateChains, "zero within-chain variance");
  const double between_over_n =
      (means.array() - means.mean()).square().sum() / static_cast<double>(m - 1);
  const double var_plus = (dn - 1.0) / dn * W + between_over_n;
  return std::sqrt(var_plus / W);
}

double max_psrf(const std::vector<Trace>& chains)
{
  if (chains.size() < 2)
    throw Error(ErrorKind::TooFewSamples, "max_psrf needs >= 2 chains");
  const Eigen::Index n = chains.front().theta.cols();
  const Eigen::Index h = chains.front().theta.rows();
  const auto m = static_cast<Eigen::Index>(chains.size());
  for (const auto& c : chains)
    if (c.theta.cols() != n || c.theta.rows() != h)
      throw Error(ErrorKind::InvalidArgument, "max_psrf: chains must have equal shapes");

  double worst = 0.0;
  Eigen::MatrixXd draws(n, m);
  for (Eigen::Index k = 0; k < h; ++k) {
    for (Eigen::Index c = 0; c < m; ++c)
      draws.col(c) = chains[c].theta.row(k).transpose();
    worst = std::max(worst, psrf(draws));
  }
  for (Eigen::Index c = 0; c < m; ++c)
    draws.col(c) = chains[c].nuisance.array().log().matrix();
  return std::max(worst, psrf(draws));
}

// ---------------------------------------------------------------------------
// Decision-space model

struct DecisionModel::QpStack
{
  Eigen::MatrixXd inverse;  // (N n) x n, Q_i^{-1} stacked
  Eigen::VectorXd offset;   // y_i - c_i stacked
  Eigen::VectorXd radius_sq;
};

DecisionModel::DecisionModel(const Dataset& data, const Priors& priors)
    : data_(std::make_shared<const Dataset>(data)),
      priors_(priors),
      h_(data.dimension()),
      n_obs_(data.size())
{
  if (h_ < 2)
    throw Error(ErrorKind::InvalidArgument, "DecisionModel requires dimension >= 2");
  bool all_qp = n_obs_ > 0;
  for (std::size_t i = 0; i < n_obs_; ++i) {
    if (bayesio::dimension(data.instances[i]) != h_ || data.observations[i].size() != h_)
      throw Error(ErrorKind::InvalidArgument, "DecisionModel: inconsistent dimensions");
    all_qp = all_qp && std::holds_alternative<QpInstance>(data.instances[i]);
  }
  if (!all_qp)
    return;

  auto stack = std::make_shared<QpStack>();
  const auto rows = static_cast<Eigen::Index>(n_obs_) * h_;
  stack->inverse.resize(rows, h_);
  stack->offset.resize(rows);
  stack->radius_sq.resize(static_cast<Eigen::Index>(n_obs_));
  for (std::size_t i = 0; i < n_obs_; ++i) {
    const auto& qp = std::get<QpInstance>(data.instances[i]);
    const Eigen::Index r = static_cast<Eigen::Index>(i) * h_;
    stack->inverse.middleRows(r, h_) = qp.Q_inverse();
    stack->offset.segment(r, h_) = data.observations[i] - qp.center();
    stack->radius_sq[static_cast<Eigen::Index>(i)] = qp.radius_sq();
  }
  workspace_.resize(rows);
  qp_ = std::move(stack);
}

double DecisionModel::statistic(const Eigen::Ref<const Eigen::VectorXd>& theta)
{
  double ssr = 0.0;
  if (qp_) {
    // x_i = c_i - mu_i Q_i^{-1} theta, so y_i - x_i = (y_i - c_i) + mu_i Q_i^{-1} theta.
    workspace_.noalias() = qp_->inverse * theta;
    for (std::size_t i = 0; i < n_obs_; ++i) {
      const Eigen::Index r = static_cast<Eigen::Index>(i) * h_;
      const auto v = workspace_.segment(r, h_);
      const double curvature = theta.dot(v);
      if (!(curvature > 0.0))
        throw Error(ErrorKind::ZeroVector, "theta must be nonzero");
      const double mu = std::sqrt(qp_->radius_sq[static_cast<Eigen::Index>(i)] / curvature);
      ssr += (qp_->offset.segment(r, h_) + mu * v).squaredNorm();
    }
    return ssr;
  }
  for (std::size_t i = 0; i < n_obs_; ++i)
    ssr += (data_->observations[i] - solve(data_->instances[i], theta).x_star).squaredNorm();
  return ssr;
}

double DecisionModel::log_normalizer(double sigma) const
{
  const double count = static_cast<double>(n_obs_) * static_cast<double>(h_);
  if (count == 0.0)
    return 0.0;
  return -0.5 * count * std::log(2.0 * std::numbers::pi * sigma * sigma);
}

double DecisionModel::data_term(double statistic, double sigma) const
{
  if (statistic == 0.0)
    return 0.0;
  return -statistic / (2.0 * sigma * sigma);
}

double DecisionModel::log_prior(double sigma) const
{
  return half_cauchy_log_density(sigma, priors_.half_cauchy_scale);
}

double DecisionModel::log_likelihood(const Eigen::Ref<const Eigen::VectorXd>& theta, double sigma)
{
  double total = 0.0;
  for (std::size_t i = 0; i < n_obs_; ++i) {
    const ForwardSolution sol = solve(data_->instances[i], theta);
    total += gaussian_iso_log_density(data_->observations[i], {sol.x_star, sigma * sigma});
  }
  return total;
}

// ---------------------------------------------------------------------------
// Objective-space model

namespace
{

std::vector<UnitVector> recover_all(const Dataset& data)
{
  std::vector<UnitVector> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    out.push_back(recover_theta(data.instances[i], data.observations[i]));
  return out;
}

}  // namespace

ObjectiveModel::ObjectiveModel(const Dataset& data, const Priors& priors)
    : ObjectiveModel(recover_all(data), data.dimension(), priors)
{
}

ObjectiveModel::ObjectiveModel(const std::vector<UnitVector>& recovered, Eigen::Index h,
                               const Priors& priors)
    : recovered_(recovered), priors_(priors), h_(h), n_obs_(recovered.size())
{
  if (h_ < 2)
    throw Error(ErrorKind::InvalidArgument, "ObjectiveModel requires dimension >= 2");
  resultant_.setZero(h_);
  for (const auto& t : recovered_) {
    if (t.size() != h_)
      throw Error(ErrorKind::InvalidArgument, "ObjectiveModel: inconsistent dimensions");
    resultant_ += t.coords();
  }
}

double ObjectiveModel::statistic(const Eigen::Ref<const Eigen::VectorXd>& theta) const
{
  return theta.dot(resultant_);
}

double ObjectiveModel::log_normalizer(double kappa) const
{
  if (n_obs_ == 0)
    return 0.0;
  return static_cast<double>(n_obs_) * vmf_log_normalizer(h_, kappa);
}

double ObjectiveModel::data_term(double statistic, double kappa) const
{
  return kappa * statistic;
}

double ObjectiveModel::log_prior(double kappa) const
{
  return gamma_log_density(kappa, priors_.gamma_shape, priors_.gamma_rate);
}

double ObjectiveModel::log_likelihood(const Eigen::Ref<const Eigen::VectorXd>& theta,
                                      double kappa) const
{
  const VmfParams params{normalize(theta), kappa};
  double total = 0.0;
  for (const auto& t : recovered_)
    total += vmf_log_density(t, params);
  return total;
}

// ---------------------------------------------------------------------------
// Chain

namespace
{

constexpr double kInitialProposalVariance = 0.01;

std::size_t adaptation_end(const ChainConfig& cfg)
{
  const auto first_block = static_cast<double>(std::min(cfg.block_size, cfg.max_iters));
  return static_cast<std::size_t>(std::floor(cfg.warmup_fraction * first_block));
}

}  // namespace

template <typename Model>
MetropolisChain<Model>::MetropolisChain(Model model, const ChainConfig& cfg, std::uint64_t seed)
    : model_(std::move(model)),
      cfg_(cfg),
      rng_(seed),
      h_(model_.dimension()),
      adapt_end_(adaptation_end(cfg)),
      theta_(sample_uniform_sphere(h_, rng_)),
      nuisance_(model_.initial_nuisance()),
      statistic_(model_.statistic(theta_.coords())),
      log_norm_(model_.log_normalizer(nuisance_)),
      kernel_(kInitialProposalVariance * Eigen::MatrixXd::Identity(h_, h_))
{
}

template <typename Model>
void MetropolisChain<Model>::advance_to(std::size_t total)
{
  if (total <= iteration_)
    return;
  const auto start = std::chrono::steady_clock::now();
  const std::size_t count = total - iteration_;
  theta_history_.reserve(static_cast<std::size_t>(h_) * total);
  nuisance_history_.reserve(total);
  accepted_theta_.reserve(total);
  accepted_nuisance_.reserve(total);
  for (std::size_t k = 0; k < count; ++k)
    step();
  elapsed_s_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

template <typename Model>
void MetropolisChain<Model>::step()
{
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  ++iteration_;

  // theta | nuisance: flat prior and symmetric proposal leave the likelihood ratio.
  UnitVector candidate = kernel_.propose(theta_, rng_);
  const double candidate_stat = model_.statistic(candidate.coords());
  const double log_ratio =
      model_.data_term(candidate_stat, nuisance_) - model_.data_term(statistic_, nuisance_);
  const bool accept_theta = std::log(unif(rng_)) <= log_ratio;
  if (accept_theta) {
    theta_ = std::move(candidate);
    statistic_ = candidate_stat;
  }

  // nuisance | theta: random walk on the log scale; the + ln(nu) terms are the
  // change-of-variables correction.
  const double proposed = nuisance_ * std::exp(nuisance_step_ * normal(rng_));
  const double u = unif(rng_);
  bool accept_nuisance = false;
  if (proposed > 0.0 && std::isfinite(proposed)) {
    const double proposed_norm = model_.log_normalizer(proposed);
    const double current = log_norm_ + model_.data_term(statistic_, nuisance_)
                           + model_.log_prior(nuisance_) + std::log(nuisance_);
    const double next = proposed_norm + model_.data_term(statistic_, proposed)
                        + model_.log_prior(proposed) + std::log(proposed);
    accept_nuisance = std::log(u) <= next - current;
    if (accept_nuisance) {
      nuisance_ = proposed;
      log_norm_ = proposed_norm;
    }
  }

  theta_history_.insert(theta_history_.end(), theta_.coords().data(),
                        theta_.coords().data() + h_);
  nuisance_history_.push_back(nuisance_);
  accepted_theta_.push_back(accept_theta ? 1 : 0);
  accepted_nuisance_.push_back(accept_nuisance ? 1 : 0);

  if (iteration_ <= adapt_end_ && iteration_ % cfg_.adapt_interval == 0)
    adapt();
}

template <typename Model>
void MetropolisChain<Model>::adapt()
{
  const std::size_t window = cfg_.adapt_interval;
  const auto [lo, hi] = cfg_.target_accept;
  const double mid = 0.5 * (lo + hi);
  auto recent_rate = [&](const std::vector<std::uint8_t>& flags) {
    std::size_t count = 0;
    for (std::size_t i = flags.size() - window; i < flags.size(); ++i)
      count += flags[i];
    return static_cast<double>(count) / static_cast<double>(window);
  };

  const double theta_rate = recent_rate(accepted_theta_);
  if (theta_rate < lo || theta_rate > hi)
    cov_scale_ = std::clamp(cov_scale_ * std::exp(3.0 * (theta_rate - mid)), 1e-8, 1e8);
  const double nuisance_rate = recent_rate(accepted_nuisance_);
  if (nuisance_rate < lo || nuisance_rate > hi)
    nuisance_step_ = std::clamp(nuisance_step_ * std::exp(1.5 * (nuisance_rate - mid)), 1e-4, 10.0);

  // The first half of the adaptation period tunes only the scale of an
  // isotropic proposal. Fitting the covariance earlier locks onto the few
  // directions visited while the chain travels towards the mode, and in high
  // dimension the chain then never gets there. Afterwards the shape comes from
  // the most recent half of the history.
  const std::size_t begin = iteration_ / 2;
  const auto count = static_cast<Eigen::Index>(iteration_ - begin);
  Eigen::MatrixXd cov;
  if (iteration_ > adapt_end_ / 2 && count >= 10) {
    const Eigen::Map<const Eigen::MatrixXd> window_samples(
        theta_history_.data() + begin * static_cast<std::size_t>(h_), h_, count);
    cov = cov_scale_ * adapt_covariance(window_samples);
  } else {
    cov = cov_scale_ * kInitialProposalVariance * Eigen::MatrixXd::Identity(h_, h_);
  }
  kernel_ = ProposalKernel(cov);
}

template <typename Model>
Trace MetropolisChain<Model>::trace(std::size_t warmup) const
{
  warmup = std::min(warmup, iteration_);
  const auto T = static_cast<Eigen::Index>(iteration_ - warmup);
  Trace out;
  out.first_iteration = warmup + 1;
  out.theta = Eigen::Map<const Eigen::MatrixXd>(
      theta_history_.data() + warmup * static_cast<std::size_t>(h_), h_, T);
  out.nuisance = Eigen::Map<const Eigen::VectorXd>(nuisance_history_.data() + warmup, T);
  out.accepted_theta.assign(accepted_theta_.begin() + static_cast<std::ptrdiff_t>(warmup),
                            accepted_theta_.end());
  out.accepted_nuisance.assign(accepted_nuisance_.begin() + static_cast<std::ptrdiff_t>(warmup),
                               accepted_nuisance_.end());
  out.proposal_cov_final = kernel_.covariance();
  return out;
}

template class MetropolisChain<DecisionModel>;
template class MetropolisChain<ObjectiveModel>;

// ---------------------------------------------------------------------------
// Multi-chain driver

std::uint64_t chain_seed(std::uint64_t master, std::size_t index) noexcept
{
  return derive_seed(derive_seed(master, 0xc4a1'75eedULL), index);
}

namespace
{

template <typename Model>
void advance_all(std::vector<MetropolisChain<Model>>& chains, std::size_t total, bool parallel)
{
  if (!parallel || chains.size() < 2) {
    for (auto& c : chains)
      c.advance_to(total);
    return;
  }
  std::vector<std::exception_ptr> errors(chains.size());
  {
    std::vector<std::jthread> workers;
    workers.reserve(chains.size());
    for (std::size_t c = 0; c < chains.size(); ++c) {
      workers.emplace_back([&, c] {
        try {
          chains[c].advance_to(total);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors)
    if (e)
      std::rethrow_exception(e);
}

template <typename Model>
ChainSetResult run_chains(const Model& model, const ChainConfig& cfg)
{
  cfg.validate();
  std::vector<MetropolisChain<Model>> chains;
  chains.reserve(cfg.n_chains);
  for (std::size_t c = 0; c < cfg.n_chains; ++c)
    chains.emplace_back(model, cfg, chain_seed(cfg.seed, c));

  ChainSetResult result;
  std::size_t total = 0;
  for (;;) {
    total = std::min(total + cfg.block_size, cfg.max_iters);
    advance_all(chains, total, cfg.parallel);
    const auto warmup =
        static_cast<std::size_t>(std::floor(cfg.warmup_fraction * static_cast<double>(total)));

    result.chains.clear();
    for (const auto& c : chains)
      result.chains.push_back(c.trace(warmup));
    result.iterations = total;
    result.warmup = warmup;

    if (cfg.n_chains < 2) {
      result.psrf = std::numeric_limits<double>::quiet_NaN();
      break;
    }
    try {
      result.psrf = max_psrf(result.chains);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateChains && e.kind() != ErrorKind::TooFewSamples)
        throw;
      result.psrf = std::numeric_limits<double>::infinity();
    }
    if (result.psrf < cfg.psrf_threshold) {
      result.converged = true;
      break;
    }
    if (total >= cfg.max_iters)
      break;
  }
  for (const auto& c : chains)
    result.wall_clock_s += c.elapsed_seconds();
  return result;
}

}  // namespace

ChainSetResult run_chain_decision(const Dataset& data, const ChainConfig& cfg,
                                  const Priors& priors)
{
  return run_chains(DecisionModel(data, priors), cfg);
}

ChainSetResult run_chain_objective(const Dataset& data, const ChainConfig& cfg,
                                   const Priors& priors)
{
  return run_chains(ObjectiveModel(data, priors), cfg);
}

}  // namespace bayesio
