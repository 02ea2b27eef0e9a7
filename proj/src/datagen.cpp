#include "bayesio/datagen.hpp"

#include <cmath>

#include "bayesio/distributions.hpp"

namespace bayesio
{

const char* to_string(Family family) noexcept
{
  return family == Family::Lp ? "lp" : "qp";
}

const char* to_string(ErrorModel model) noexcept
{
  return model == ErrorModel::Decision ? "decision" : "objective";
}

Family parse_family(const std::string& text)
{
  if (text == "lp")
    return Family::Lp;
  if (text == "qp")
    return Family::Qp;
  throw Error(ErrorKind::InvalidArgument, "unknown family '" + text + "'");
}

ErrorModel parse_error_model(const std::string& text)
{
  if (text == "decision")
    return ErrorModel::Decision;
  if (text == "objective")
    return ErrorModel::Objective;
  throw Error(ErrorKind::InvalidArgument, "unknown error model '" + text + "'");
}

UnitVector default_theta_star(Eigen::Index n)
{
  return normalize(Eigen::VectorXd::Ones(n));
}

ForwardInstance generate_instance(Family family, Eigen::Index n, Eigen::Index m, Rng& rng)
{
  if (family == Family::Lp)
    return generate_lp_instance(n, m, rng);
  return generate_qp_instance(n, rng);
}

namespace
{

UnitVector resolve_theta_star(const GenerationSpec& spec)
{
  if (!spec.theta_star)
    return default_theta_star(spec.n);
  if (spec.theta_star->size() != spec.n)
    throw Error(ErrorKind::InvalidArgument, "theta_star dimension must equal n");
  return normalize(*spec.theta_star);
}

Dataset empty_dataset(const GenerationSpec& spec, ErrorModel model, double noise,
                      const UnitVector& theta_star)
{
  Dataset data;
  data.family = spec.family;
  data.error_model = model;
  data.noise_param = noise;
  data.theta_star = theta_star.coords();
  data.seed = spec.seed;
  data.instances.reserve(spec.N);
  data.observations.reserve(spec.N);
  return data;
}

}  // namespace

Dataset generate_decision_dataset(const GenerationSpec& spec, double sigma2)
{
  if (!(sigma2 > 0.0))
    throw Error(ErrorKind::InvalidArgument, "sigma2 must be positive");
  const UnitVector theta_star = resolve_theta_star(spec);
  Dataset data = empty_dataset(spec, ErrorModel::Decision, sigma2, theta_star);
  const double sigma = std::sqrt(sigma2);
  for (std::size_t i = 0; i < spec.N; ++i) {
    Rng rng = make_rng(spec.seed, i);
    ForwardInstance inst = generate_instance(spec.family, spec.n, spec.m, rng);
    Eigen::VectorXd y = solve(inst, theta_star.coords()).x_star;
    y += sigma * sample_standard_normal(spec.n, rng);
    data.instances.push_back(std::move(inst));
    data.observations.push_back(std::move(y));
  }
  return data;
}

Dataset generate_objective_dataset(const GenerationSpec& spec, double kappa,
                                   std::vector<Eigen::VectorXd>* hidden)
{
  if (!(kappa >= 0.0))
    throw Error(ErrorKind::InvalidArgument, "kappa must be nonnegative");
  const UnitVector theta_star = resolve_theta_star(spec);
  Dataset data = empty_dataset(spec, ErrorModel::Objective, kappa, theta_star);
  if (hidden)
    hidden->clear();
  for (std::size_t i = 0; i < spec.N; ++i) {
    Rng rng = make_rng(spec.seed, i);
    ForwardInstance inst = generate_instance(spec.family, spec.n, spec.m, rng);
    const UnitVector perturbed = vmf_sample({theta_star, kappa}, rng);
    Eigen::VectorXd y = solve(inst, perturbed.coords()).x_star;
    if (hidden)
      hidden->push_back(perturbed.coords());
    data.instances.push_back(std::move(inst));
    data.observations.push_back(std::move(y));
  }
  return data;
}

}  // namespace bayesio
