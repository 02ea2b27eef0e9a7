#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bayesio/datagen.hpp"
#include "bayesio/io.hpp"
#include "bayesio/samplers.hpp"

namespace bayesio
{

enum class Algorithm
{
  Decision = 1,  // Gaussian noise on decisions, sigma unknown
  Objective = 2,  // vMF noise on the objective, kappa unknown
};

Algorithm parse_algorithm(int code);

struct CoverageConfig
{
  Family family = Family::Qp;
  Algorithm algorithm = Algorithm::Objective;
  Eigen::Index n = 5;
  Eigen::Index m = 75;
  std::size_t N = 100;
  double noise_param = 10.0;  // sigma^2 for algorithm 1, kappa for algorithm 2
  std::size_t replications = 50;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  ChainConfig chain;
  Priors priors;
};

struct ReplicationResult
{
  std::size_t index = 0;
  std::uint64_t dataset_seed = 0;
  bool contained = false;
  double alpha_rms_deg = 0.0;
  double psrf_final = 0.0;
  std::size_t iters = 0;
  bool converged = false;
  double wall_clock_s = 0.0;
};

struct ReplicationFailure
{
  std::size_t index = 0;
  std::string message;
};

struct CoverageReport
{
  CoverageConfig config;
  /// contained / per_replication.size(); failed replications are excluded.
  double coverage = 0.0;
  double alpha_rms_mean = 0.0;  // degrees
  double alpha_rms_sd = 0.0;    // degrees, n - 1 denominator
  /// Mean over replications of the all-chains-serialized sampling time.
  double wall_clock_s = 0.0;
  std::vector<ReplicationResult> per_replication;
  std::vector<ReplicationFailure> failures;
};

/// Dataset of replication r: seed derive_seed(cfg.seed, r).
Dataset replication_dataset(const CoverageConfig& cfg, std::size_t r);

ChainSetResult run_algorithm(Algorithm algorithm, const Dataset& data, const ChainConfig& chain,
                             const Priors& priors);

/// Generates the dataset, samples, fits the 1 - alpha region and checks theta*.
ReplicationResult run_replication(const CoverageConfig& cfg, std::size_t r);

/// Runs cfg.replications replications on up to cfg.jobs threads. Output is
/// ordered by replication index and does not depend on cfg.jobs. Throws if
/// more than 5% of replications fail.
CoverageReport run_coverage_experiment(const CoverageConfig& cfg);

Json to_json(const CoverageConfig& cfg);
CoverageConfig coverage_config_from_json(const Json& j, CoverageConfig base = {});
Json to_json(const CoverageReport& report);

}  // namespace bayesio
