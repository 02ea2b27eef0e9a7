#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bayesio/forward.hpp"
#include "bayesio/geometry.hpp"
#include "bayesio/inverse.hpp"

namespace bayesio
{

enum class Family
{
  Lp,
  Qp,
};

enum class ErrorModel
{
  Decision,
  Objective,
};

const char* to_string(Family family) noexcept;
const char* to_string(ErrorModel model) noexcept;
Family parse_family(const std::string& text);
ErrorModel parse_error_model(const std::string& text);

struct Dataset
{
  Family family = Family::Qp;
  ErrorModel error_model = ErrorModel::Objective;
  double noise_param = 0.0;  // sigma^2 (decision) or kappa (objective)
  Eigen::VectorXd theta_star;
  std::uint64_t seed = 0;
  std::vector<ForwardInstance> instances;
  std::vector<Eigen::VectorXd> observations;

  std::size_t size() const noexcept { return observations.size(); }
  Eigen::Index dimension() const noexcept { return theta_star.size(); }
  Observation observation(std::size_t i) const { return {instances[i], observations[i]}; }
};

struct GenerationSpec
{
  Family family = Family::Qp;
  Eigen::Index n = 20;
  Eigen::Index m = 75;  // LP only
  std::size_t N = 0;
  /// Defaults to e / sqrt(n).
  std::optional<Eigen::VectorXd> theta_star;
  std::uint64_t seed = 0;
};

/// e / sqrt(n).
UnitVector default_theta_star(Eigen::Index n);

/// y_i = x*(u_i, theta*) + eps_i, eps_i ~ N(0, sigma2 I). Observation i draws
/// from its own stream derive_seed(seed, i).
Dataset generate_decision_dataset(const GenerationSpec& spec, double sigma2);

/// y_i = x*(u_i, theta~_i), theta~_i ~ vMF(theta*, kappa). The perturbed
/// directions are not part of the dataset; pass `hidden` to receive them.
Dataset generate_objective_dataset(const GenerationSpec& spec, double kappa,
                                   std::vector<Eigen::VectorXd>* hidden = nullptr);

ForwardInstance generate_instance(Family family, Eigen::Index n, Eigen::Index m, Rng& rng);

}  // namespace bayesio
