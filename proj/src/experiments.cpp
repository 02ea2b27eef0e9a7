#include "bayesio/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "bayesio/uncertainty.hpp"

namespace bayesio
{

Algorithm parse_algorithm(int code)
{
  if (code == 1)
    return Algorithm::Decision;
  if (code == 2)
    return Algorithm::Objective;
  throw Error(ErrorKind::InvalidArgument, "algorithm must be 1 or 2");
}

Dataset replication_dataset(const CoverageConfig& cfg, std::size_t r)
{
  GenerationSpec spec;
  spec.family = cfg.family;
  spec.n = cfg.n;
  spec.m = cfg.m;
  spec.N = cfg.N;
  spec.seed = derive_seed(cfg.seed, r);
  if (cfg.algorithm == Algorithm::Decision)
    return generate_decision_dataset(spec, cfg.noise_param);
  return generate_objective_dataset(spec, cfg.noise_param);
}

ChainSetResult run_algorithm(Algorithm algorithm, const Dataset& data, const ChainConfig& chain,
                             const Priors& priors)
{
  if (algorithm == Algorithm::Decision)
    return run_chain_decision(data, chain, priors);
  return run_chain_objective(data, chain, priors);
}

ReplicationResult run_replication(const CoverageConfig& cfg, std::size_t r)
{
  const Dataset data = replication_dataset(cfg, r);
  ChainConfig chain = cfg.chain;
  chain.seed = data.seed;
  const ChainSetResult run = run_algorithm(cfg.algorithm, data, chain, cfg.priors);

  const Eigen::MatrixXd pooled = run.pooled_theta();
  const CredibleRegion region = fit_region(pooled, cfg.alpha);
  const UnitVector theta_star = normalize(data.theta_star);

  ReplicationResult out;
  out.index = r;
  out.dataset_seed = data.seed;
  out.contained = region_contains(region, theta_star);
  out.alpha_rms_deg = to_degrees(alpha_rms(pooled));
  out.psrf_final = run.psrf;
  out.iters = run.iterations;
  out.converged = run.converged;
  out.wall_clock_s = run.wall_clock_s;
  return out;
}

CoverageReport run_coverage_experiment(const CoverageConfig& cfg)
{
  if (cfg.replications == 0)
    throw Error(ErrorKind::InvalidArgument, "replications must be >= 1");
  cfg.chain.validate();

  std::vector<std::optional<ReplicationResult>> results(cfg.replications);
  std::vector<std::string> errors(cfg.replications);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < cfg.replications; r = next++) {
      try {
        results[r] = run_replication(cfg, r);
      } catch (const std::exception& e) {
        errors[r] = e.what();
      }
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(cfg.jobs, cfg.replications));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j)
      pool.emplace_back(worker);
  }

  CoverageReport report;
  report.config = cfg;
  for (std::size_t r = 0; r < cfg.replications; ++r) {
    if (results[r])
      report.per_replication.push_back(*results[r]);
    else
      report.failures.push_back({r, errors[r]});
  }
  if (20 * report.failures.size() > cfg.replications) {
    throw Error(ErrorKind::InvalidArgument,
                std::to_string(report.failures.size()) + " of " + std::to_string(cfg.replications)
                    + " replications failed; first: " + report.failures.front().message);
  }

  const auto count = static_cast<double>(report.per_replication.size());
  std::size_t contained = 0;
  double sum = 0.0;
  double time = 0.0;
  for (const auto& rep : report.per_replication) {
    contained += rep.contained ? 1 : 0;
    sum += rep.alpha_rms_deg;
    time += rep.wall_clock_s;
  }
  report.coverage = static_cast<double>(contained) / count;
  report.alpha_rms_mean = sum / count;
  report.wall_clock_s = time / count;
  if (report.per_replication.size() > 1) {
    double ss = 0.0;
    for (const auto& rep : report.per_replication)
      ss += (rep.alpha_rms_deg - report.alpha_rms_mean) * (rep.alpha_rms_deg - report.alpha_rms_mean);
    report.alpha_rms_sd = std::sqrt(ss / (count - 1.0));
  }
  return report;
}

Json to_json(const CoverageConfig& cfg)
{
  return {{"family", to_string(cfg.family)},
          {"algorithm", static_cast<int>(cfg.algorithm)},
          {"n", cfg.n},
          {"m", cfg.m},
          {"N", cfg.N},
          {"noise_param", cfg.noise_param},
          {"replications", cfg.replications},
          {"alpha", cfg.alpha},
          {"seed", cfg.seed},
          {"jobs", cfg.jobs},
          {"chain", to_json(cfg.chain)},
          {"priors", to_json(cfg.priors)}};
}

CoverageConfig coverage_config_from_json(const Json& j, CoverageConfig cfg)
{
  if (!j.is_object())
    throw Error(ErrorKind::Io, "experiment config must be an object");
  try {
    if (j.contains("family"))
      cfg.family = parse_family(j.at("family").get<std::string>());
    if (j.contains("algorithm"))
      cfg.algorithm = parse_algorithm(j.at("algorithm").get<int>());
    cfg.n = j.value("n", cfg.n);
    cfg.m = j.value("m", cfg.m);
    cfg.N = j.value("N", cfg.N);
    cfg.noise_param = j.value("noise_param", cfg.noise_param);
    cfg.replications = j.value("replications", cfg.replications);
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.jobs = j.value("jobs", cfg.jobs);
    if (j.contains("chain"))
      cfg.chain = chain_config_from_json(j.at("chain"), cfg.chain);
    if (j.contains("priors"))
      cfg.priors = priors_from_json(j.at("priors"), cfg.priors);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::Io, std::string("experiment config: ") + e.what());
  }
  return cfg;
}

Json to_json(const CoverageReport& report)
{
  const CoverageConfig& cfg = report.config;
  Json reps = Json::array();
  for (const auto& rep : report.per_replication) {
    reps.push_back({{"index", rep.index},
                    {"dataset_seed", rep.dataset_seed},
                    {"contained", rep.contained},
                    {"alpha_rms", rep.alpha_rms_deg},
                    {"psrf_final", rep.psrf_final},
                    {"iters", rep.iters},
                    {"converged", rep.converged},
                    {"wall_clock_s", rep.wall_clock_s}});
  }
  Json failures = Json::array();
  for (const auto& f : report.failures)
    failures.push_back({{"index", f.index}, {"error", f.message}});
  return {{"family", to_string(cfg.family)},
          {"algorithm", static_cast<int>(cfg.algorithm)},
          {"n", cfg.n},
          {"m", cfg.m},
          {"N", cfg.N},
          {"noise_param", cfg.noise_param},
          {"replications", report.per_replication.size()},
          {"alpha", cfg.alpha},
          {"seed", cfg.seed},
          {"coverage", report.coverage},
          {"alpha_rms_mean", report.alpha_rms_mean},
          {"alpha_rms_sd", report.alpha_rms_sd},
          {"wall_clock_s", report.wall_clock_s},
          {"per_replication", std::move(reps)},
          {"failures", std::move(failures)}};
}

}  // namespace bayesio
