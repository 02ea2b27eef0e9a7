#include "bayesio/cli.hpp"

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bayesio/experiments.hpp"
#include "bayesio/io.hpp"
#include "bayesio/uncertainty.hpp"

namespace bayesio
{

namespace fs = std::filesystem;

namespace
{

constexpr int kHistogramBins = 36;

void write_or_print(const std::string& path, const Json& j, std::ostream& out)
{
  if (path.empty() || path == "-")
    out << j.dump(2) << '\n';
  else
    write_json_file(path, j);
}

Eigen::MatrixXd pooled(const std::vector<Trace>& traces)
{
  ChainSetResult set;
  set.chains = traces;
  return set.pooled_theta();
}

struct GenInstanceArgs
{
  std::string family = "qp";
  Eigen::Index n = 20;
  Eigen::Index m = 75;
  std::uint64_t seed = 0;
  std::string out;
};

struct GenDataArgs
{
  std::string family = "qp";
  std::string error = "objective";
  Eigen::Index n = 20;
  Eigen::Index m = 75;
  std::size_t N = 0;
  std::optional<double> sigma2;
  std::optional<double> kappa;
  std::vector<double> theta_star;
  std::uint64_t seed = 0;
  std::string out;
};

struct RunChainArgs
{
  std::string data;
  std::optional<int> algorithm;
  std::optional<std::size_t> chains;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> block_size;
  std::optional<std::size_t> max_iters;
  std::optional<double> warmup_fraction;
  std::optional<double> psrf_threshold;
  std::string config;
  std::string out;
};

struct RegionArgs
{
  std::string trace;
  double alpha = 0.05;
  std::optional<double> epsilon;
  std::string out;
  std::string hist;
};

struct ContainsArgs
{
  std::string region;
  std::vector<double> theta;
};

struct CoverageArgs
{
  std::string config;
  std::string out;
  std::optional<std::size_t> jobs;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replications;
};

int gen_instance(const GenInstanceArgs& a, std::ostream& out)
{
  Rng rng = make_rng(a.seed, 0);
  write_or_print(a.out, to_json(generate_instance(parse_family(a.family), a.n, a.m, rng)), out);
  return 0;
}

int gen_data(const GenDataArgs& a, std::ostream& out)
{
  GenerationSpec spec;
  spec.family = parse_family(a.family);
  spec.n = a.n;
  spec.m = a.m;
  spec.N = a.N;
  spec.seed = a.seed;
  if (!a.theta_star.empty())
    spec.theta_star = Eigen::Map<const Eigen::VectorXd>(a.theta_star.data(),
                                                        static_cast<Eigen::Index>(a.theta_star.size()));
  Dataset data;
  if (parse_error_model(a.error) == ErrorModel::Decision) {
    if (!a.sigma2)
      throw Error(ErrorKind::InvalidArgument, "--sigma2 is required for decision-space data");
    data = generate_decision_dataset(spec, *a.sigma2);
  } else {
    if (!a.kappa)
      throw Error(ErrorKind::InvalidArgument, "--kappa is required for objective-space data");
    data = generate_objective_dataset(spec, *a.kappa);
  }
  write_or_print(a.out, to_json(data), out);
  return 0;
}

int run_chain(const RunChainArgs& a, std::ostream& out)
{
  const Dataset data = load_dataset(a.data);
  ChainConfig cfg;
  cfg.seed = data.seed;
  if (!a.config.empty())
    cfg = chain_config_from_json(read_json_file(a.config), cfg);
  if (a.chains)
    cfg.n_chains = *a.chains;
  if (a.seed)
    cfg.seed = *a.seed;
  if (a.block_size)
    cfg.block_size = *a.block_size;
  if (a.max_iters)
    cfg.max_iters = *a.max_iters;
  if (a.warmup_fraction)
    cfg.warmup_fraction = *a.warmup_fraction;
  if (a.psrf_threshold)
    cfg.psrf_threshold = *a.psrf_threshold;

  const Algorithm algorithm = a.algorithm ? parse_algorithm(*a.algorithm)
                              : data.error_model == ErrorModel::Decision ? Algorithm::Decision
                                                                          : Algorithm::Objective;
  const ChainSetResult run = run_algorithm(algorithm, data, cfg, Priors{});

  fs::create_directories(a.out);
  Json chains = Json::array();
  for (std::size_t c = 0; c < run.chains.size(); ++c) {
    const Trace& t = run.chains[c];
    write_trace_csv(fs::path(a.out) / trace_file_name(c), t);
    chains.push_back({{"file", trace_file_name(c).string()},
                      {"theta_acceptance", t.theta_acceptance_rate()},
                      {"nuisance_acceptance", t.nuisance_acceptance_rate()},
                      {"proposal_cov_final", to_json(t.proposal_cov_final)}});
  }
  const Json diagnostics{{"algorithm", static_cast<int>(algorithm)},
                         {"psrf", run.psrf},
                         {"converged", run.converged},
                         {"iterations", run.iterations},
                         {"warmup", run.warmup},
                         {"config", to_json(cfg)},
                         {"wall_clock_s", run.wall_clock_s},
                         {"chains", std::move(chains)}};
  write_json_file(fs::path(a.out) / "diagnostics.json", diagnostics);
  out << "psrf " << run.psrf << (run.converged ? " converged" : " not converged") << " after "
      << run.iterations << " iterations\n";
  return 0;
}

int region(const RegionArgs& a, std::ostream& out)
{
  const Eigen::MatrixXd samples = pooled(read_trace_dir(a.trace));
  const CredibleRegion r = fit_region(samples, a.alpha, a.epsilon);
  write_or_print(a.out, to_json(r), out);

  if (!a.hist.empty()) {
    if (samples.rows() != 2)
      throw Error(ErrorKind::InvalidArgument, "--emit-hist requires h = 2");
    const double width = 2.0 * std::numbers::pi / kHistogramBins;
    std::array<std::size_t, kHistogramBins> counts{};
    for (Eigen::Index t = 0; t < samples.cols(); ++t) {
      const double angle = std::atan2(samples(1, t), samples(0, t));
      const int bin = std::clamp(static_cast<int>(std::floor((angle + std::numbers::pi) / width)), 0,
                                 kHistogramBins - 1);
      ++counts[static_cast<std::size_t>(bin)];
    }
    std::ofstream csv(a.hist);
    if (!csv)
      throw Error(ErrorKind::Io, "cannot write " + a.hist);
    csv.precision(17);
    csv << "angle_radians,count\n";
    for (int b = 0; b < kHistogramBins; ++b)
      csv << -std::numbers::pi + (b + 0.5) * width << ',' << counts[static_cast<std::size_t>(b)] << '\n';
  }
  return 0;
}

int contains(const ContainsArgs& a, std::ostream& out)
{
  const CredibleRegion r = region_from_json(read_json_file(a.region));
  const Eigen::Map<const Eigen::VectorXd> theta(a.theta.data(), static_cast<Eigen::Index>(a.theta.size()));
  out << (region_contains(r, normalize(theta)) ? "true" : "false") << '\n';
  return 0;
}

int alpha_rms_cmd(const std::string& trace, std::ostream& out)
{
  const double rad = alpha_rms(pooled(read_trace_dir(trace)));
  out << Json{{"radians", rad}, {"degrees", to_degrees(rad)}}.dump() << '\n';
  return 0;
}

int psrf_cmd(const std::string& trace, std::ostream& out)
{
  out << Json{{"psrf", max_psrf(read_trace_dir(trace))}}.dump() << '\n';
  return 0;
}

int coverage(const CoverageArgs& a, std::ostream& out)
{
  CoverageConfig cfg = coverage_config_from_json(read_json_file(a.config));
  if (a.jobs)
    cfg.jobs = *a.jobs;
  if (a.seed)
    cfg.seed = *a.seed;
  if (a.replications)
    cfg.replications = *a.replications;
  const CoverageReport report = run_coverage_experiment(cfg);
  write_or_print(a.out, to_json(report), out);
  if (!a.out.empty() && a.out != "-") {
    out << "coverage " << report.coverage << " alpha_rms " << report.alpha_rms_mean << " +- "
        << report.alpha_rms_sd << " deg over " << report.per_replication.size() << " replications\n";
  }
  return 0;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Bayesian inverse optimization on the unit hypersphere", "bayesio"};
  app.require_subcommand(1);

  GenInstanceArgs gi;
  auto* cmd_gi = app.add_subcommand("gen-instance", "Generate one forward-problem instance");
  cmd_gi->add_option("--family", gi.family, "lp or qp")->check(CLI::IsMember({"lp", "qp"}));
  cmd_gi->add_option("--n", gi.n, "Decision dimension");
  cmd_gi->add_option("--m", gi.m, "LP rows");
  cmd_gi->add_option("--seed", gi.seed)->required();
  cmd_gi->add_option("--out", gi.out, "Output JSON (stdout if omitted)");

  GenDataArgs gd;
  auto* cmd_gd = app.add_subcommand("gen-data", "Generate a dataset");
  cmd_gd->add_option("--family", gd.family)->check(CLI::IsMember({"lp", "qp"}));
  cmd_gd->add_option("--error", gd.error)->check(CLI::IsMember({"decision", "objective"}));
  cmd_gd->add_option("--n", gd.n);
  cmd_gd->add_option("--m", gd.m);
  cmd_gd->add_option("--N", gd.N, "Number of observations")->required();
  cmd_gd->add_option("--sigma2", gd.sigma2, "Decision-space noise variance");
  cmd_gd->add_option("--kappa", gd.kappa, "Objective-space vMF concentration");
  cmd_gd->add_option("--theta-star", gd.theta_star, "Comma-separated true direction")->delimiter(',');
  cmd_gd->add_option("--seed", gd.seed)->required();
  cmd_gd->add_option("--out", gd.out);

  RunChainArgs rc;
  auto* cmd_rc = app.add_subcommand("run-chain", "Sample the posterior of a dataset");
  cmd_rc->add_option("--data", rc.data)->required()->check(CLI::ExistingFile);
  cmd_rc->add_option("--algorithm", rc.algorithm, "1 decision-space, 2 objective-space")
      ->check(CLI::IsMember({1, 2}));
  cmd_rc->add_option("--chains", rc.chains);
  cmd_rc->add_option("--seed", rc.seed, "Defaults to the dataset seed");
  cmd_rc->add_option("--block-size", rc.block_size);
  cmd_rc->add_option("--max-iters", rc.max_iters);
  cmd_rc->add_option("--warmup-fraction", rc.warmup_fraction);
  cmd_rc->add_option("--psrf-threshold", rc.psrf_threshold);
  cmd_rc->add_option("--config", rc.config, "Chain config JSON; flags override it")
      ->check(CLI::ExistingFile);
  cmd_rc->add_option("--out", rc.out, "Output directory")->required();

  RegionArgs rg;
  auto* cmd_rg = app.add_subcommand("region", "Fit a credible region to traces");
  cmd_rg->add_option("--trace", rg.trace, "Trace directory")->required()->check(CLI::ExistingDirectory);
  cmd_rg->add_option("--alpha", rg.alpha);
  cmd_rg->add_option("--epsilon", rg.epsilon);
  cmd_rg->add_option("--out", rg.out);
  cmd_rg->add_option("--emit-hist", rg.hist, "Angular histogram CSV (h = 2)");

  ContainsArgs ct;
  auto* cmd_ct = app.add_subcommand("contains", "Test region membership");
  cmd_ct->add_option("--region", ct.region)->required()->check(CLI::ExistingFile);
  cmd_ct->add_option("--theta", ct.theta, "Comma-separated direction")->required()->delimiter(',');

  std::string ar_trace;
  auto* cmd_ar = app.add_subcommand("alpha-rms", "Angular dispersion of traces");
  cmd_ar->add_option("--trace", ar_trace)->required()->check(CLI::ExistingDirectory);

  CoverageArgs cv;
  auto* cmd_cv = app.add_subcommand("coverage", "Run a coverage experiment");
  cmd_cv->add_option("--config", cv.config)->required()->check(CLI::ExistingFile);
  cmd_cv->add_option("--out", cv.out);
  cmd_cv->add_option("--jobs", cv.jobs);
  cmd_cv->add_option("--seed", cv.seed);
  cmd_cv->add_option("--replications", cv.replications);

  std::string ps_trace;
  auto* cmd_ps = app.add_subcommand("psrf", "Maximum PSRF of traces");
  cmd_ps->add_option("--trace", ps_trace)->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cmd_gi->parsed())
      return gen_instance(gi, out);
    if (cmd_gd->parsed())
      return gen_data(gd, out);
    if (cmd_rc->parsed())
      return run_chain(rc, out);
    if (cmd_rg->parsed())
      return region(rg, out);
    if (cmd_ct->parsed())
      return contains(ct, out);
    if (cmd_ar->parsed())
      return alpha_rms_cmd(ar_trace, out);
    if (cmd_cv->parsed())
      return coverage(cv, out);
    if (cmd_ps->parsed())
      return psrf_cmd(ps_trace, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace bayesio
