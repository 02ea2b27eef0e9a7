#include "doctest.h"

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bayesio/cli.hpp"
#include "bayesio/distributions.hpp"
#include "bayesio/experiments.hpp"
#include "bayesio/io.hpp"

using namespace bayesio;
namespace fs = std::filesystem;

namespace
{

struct TempDir
{
  fs::path path;
  TempDir()
  {
    static int counter = 0;
    path = fs::temp_directory_path() / ("bayesio_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct CliResult
{
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args)
{
  args.insert(args.begin(), "bayesio");
  std::vector<const char*> argv;
  for (const auto& a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

void check_same(const Dataset& a, const Dataset& b)
{
  CHECK(a.family == b.family);
  CHECK(a.error_model == b.error_model);
  CHECK(a.noise_param == b.noise_param);
  CHECK(a.theta_star == b.theta_star);
  CHECK(a.seed == b.seed);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.observations[i] == b.observations[i]);
    CHECK(a.instances[i].index() == b.instances[i].index());
    if (const auto* lp = std::get_if<LpInstance>(&a.instances[i])) {
      CHECK(lp->A == std::get<LpInstance>(b.instances[i]).A);
      CHECK(lp->b == std::get<LpInstance>(b.instances[i]).b);
    } else {
      CHECK(std::get<QpInstance>(a.instances[i]).Q() == std::get<QpInstance>(b.instances[i]).Q());
    }
  }
}

}  // namespace

TEST_CASE("dataset JSON round trip is field-exact")
{
  TempDir dir;
  for (Family family : {Family::Lp, Family::Qp}) {
    GenerationSpec spec;
    spec.family = family;
    spec.n = 4;
    spec.m = 9;
    spec.N = 15;
    spec.seed = 0xfeedfacecafebeefULL;
    const Dataset d = generate_decision_dataset(spec, 0.0123);
    save_dataset(dir / "d.json", d);
    check_same(d, load_dataset(dir / "d.json"));
  }
}

TEST_CASE("instance and region JSON shapes")
{
  Rng rng(1);
  const Json lp = to_json(ForwardInstance(generate_lp_instance(3, 4, rng)));
  CHECK(lp["kind"] == "lp");
  CHECK(lp["A"].size() == 4);
  CHECK(lp["A"][0].size() == 3);
  CHECK(lp["b"].size() == 4);
  const Json qp = to_json(ForwardInstance(generate_qp_instance(3, rng)));
  CHECK(qp["kind"] == "qp");
  CHECK(qp["Q"].size() == 3);
  CHECK_THROWS_AS(instance_from_json(Json{{"kind", "sdp"}}), Error);

  Eigen::MatrixXd samples(3, 50);
  for (int t = 0; t < 50; ++t)
    samples.col(t) = vmf_sample({normalize(Eigen::Vector3d(1, 2, 3)), 20.0}, rng).coords();
  const CredibleRegion region = fit_region(samples, 0.1);
  const CredibleRegion back = region_from_json(Json::parse(to_json(region).dump()));
  CHECK(back.mean_dir == region.mean_dir);
  CHECK(back.tangent_mean == region.tangent_mean);
  CHECK(back.cov == region.cov);
  CHECK(back.q == region.q);
  CHECK(back.alpha == region.alpha);
  CHECK(back.epsilon == region.epsilon);
  for (const char* key : {"mean_dir", "tangent_mean", "cov", "q", "alpha", "epsilon"})
    CHECK(to_json(region).contains(key));
}

TEST_CASE("trace CSV round trip is exact")
{
  TempDir dir;
  Rng rng(2);
  Trace t;
  t.theta.resize(3, 40);
  t.nuisance.resize(40);
  for (int i = 0; i < 40; ++i) {
    t.theta.col(i) = sample_uniform_sphere(3, rng).coords();
    t.nuisance[i] = std::exp(sample_standard_normal(1, rng)[0]);
    t.accepted_theta.push_back(static_cast<std::uint8_t>(i % 3 == 0));
    t.accepted_nuisance.push_back(static_cast<std::uint8_t>(i % 2 == 0));
  }
  t.first_iteration = 101;
  write_trace_csv(dir / "chain_0.csv", t);
  std::ifstream in(dir / "chain_0.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "iter,theta_1,theta_2,theta_3,nuisance,accepted_theta,accepted_nuisance");
  const Trace back = read_trace_csv(dir / "chain_0.csv");
  CHECK(back.theta == t.theta);
  CHECK(back.nuisance == t.nuisance);
  CHECK(back.accepted_theta == t.accepted_theta);
  CHECK(back.accepted_nuisance == t.accepted_nuisance);
  CHECK(back.first_iteration == 101);
}

TEST_CASE("CLI usage errors exit with 1")
{
  CHECK(cli({}).code == 1);
  CHECK(cli({"frobnicate"}).code == 1);
  const CliResult r = cli({"gen-data", "--family", "qp", "--N", "3", "--seed", "1", "--bogus", "2"});
  CHECK(r.code == 1);
  CHECK_FALSE(r.err.empty());
  CHECK(cli({"gen-data", "--N", "3"}).code == 1);  // --seed is mandatory
  CHECK(cli({"gen-instance", "--family", "milp", "--seed", "1"}).code == 1);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("CLI runtime failures exit with 2")
{
  TempDir dir;
  CHECK(cli({"gen-data", "--error", "decision", "--N", "3", "--seed", "1", "--out", dir / "d.json"}).code == 2);
  const CliResult r = cli({"gen-data", "--family", "qp", "--n", "1", "--N", "0", "--kappa", "1", "--seed", "1", "--out", "/proc/bayesio/d.json"});
  CHECK(r.code == 2);
  CHECK(r.err.find("error") != std::string::npos);
}

TEST_CASE("gen-instance and gen-data write valid files")
{
  TempDir dir;
  REQUIRE(cli({"gen-instance", "--family", "lp", "--n", "3", "--m", "5", "--seed", "4", "--out", dir / "i.json"}).code == 0);
  const ForwardInstance inst = instance_from_json(read_json_file(dir / "i.json"));
  CHECK(dimension(inst) == 3);

  REQUIRE(cli({"gen-data", "--family", "qp", "--error", "objective", "--n", "5", "--N", "100", "--kappa", "10",
               "--seed", "7", "--out", dir / "d.json"})
              .code == 0);
  GenerationSpec spec;
  spec.family = Family::Qp;
  spec.n = 5;
  spec.N = 100;
  spec.seed = 7;
  check_same(generate_objective_dataset(spec, 10.0), load_dataset(dir / "d.json"));

  REQUIRE(cli({"gen-data", "--family", "qp", "--error", "decision", "--n", "3", "--N", "4", "--sigma2", "0.5",
               "--theta-star", "1,0,0", "--seed", "7", "--out", dir / "e.json"})
              .code == 0);
  CHECK(load_dataset(dir / "e.json").theta_star == Eigen::Vector3d(1, 0, 0));
}

TEST_CASE("run-chain, region, contains, alpha-rms and psrf reproduce the coverage harness")
{
  TempDir dir;
  CoverageConfig cfg;
  cfg.family = Family::Qp;
  cfg.algorithm = Algorithm::Objective;
  cfg.n = 3;
  cfg.N = 60;
  cfg.noise_param = 10.0;
  cfg.seed = 42;
  cfg.chain.block_size = 3000;
  cfg.chain.max_iters = 6000;
  const ReplicationResult expected = run_replication(cfg, 0);

  const std::string seed = std::to_string(derive_seed(cfg.seed, 0));
  REQUIRE(cli({"gen-data", "--family", "qp", "--error", "objective", "--n", "3", "--N", "60", "--kappa", "10",
               "--seed", seed, "--out", dir / "d.json"})
              .code == 0);
  REQUIRE(cli({"run-chain", "--data", dir / "d.json", "--algorithm", "2", "--chains", "4", "--block-size", "3000",
               "--max-iters", "6000", "--out", dir / "trace"})
              .code == 0);
  for (int c = 0; c < 4; ++c)
    CHECK(fs::exists(dir / ("trace/chain_" + std::to_string(c) + ".csv")));
  const Json diag = read_json_file(dir / "trace/diagnostics.json");
  CHECK(diag["psrf"].get<double>() == expected.psrf_final);
  CHECK(diag["iterations"].get<std::size_t>() == expected.iters);

  REQUIRE(cli({"region", "--trace", dir / "trace", "--alpha", "0.05", "--out", dir / "r.json"}).code == 0);
  const CliResult inside = cli({"contains", "--region", dir / "r.json", "--theta", "1,1,1"});
  REQUIRE(inside.code == 0);
  CHECK(inside.out == (expected.contained ? "true\n" : "false\n"));

  const CliResult rms = cli({"alpha-rms", "--trace", dir / "trace"});
  REQUIRE(rms.code == 0);
  CHECK(Json::parse(rms.out)["degrees"].get<double>() == doctest::Approx(expected.alpha_rms_deg).epsilon(1e-12));

  const CliResult ps = cli({"psrf", "--trace", dir / "trace"});
  REQUIRE(ps.code == 0);
  CHECK(Json::parse(ps.out)["psrf"].get<double>() == expected.psrf_final);

  CHECK(cli({"contains", "--region", dir / "r.json", "--theta", "1,1"}).code == 2);
}

TEST_CASE("region --emit-hist writes 36 angular bins")
{
  TempDir dir;
  REQUIRE(cli({"gen-data", "--family", "qp", "--error", "objective", "--n", "2", "--N", "30", "--kappa", "5",
               "--seed", "3", "--out", dir / "d.json"})
              .code == 0);
  REQUIRE(cli({"run-chain", "--data", dir / "d.json", "--chains", "2", "--block-size", "2000", "--max-iters", "2000",
               "--out", dir / "t"})
              .code == 0);
  REQUIRE(cli({"region", "--trace", dir / "t", "--out", dir / "r.json", "--emit-hist", dir / "h.csv"}).code == 0);
  std::ifstream in(dir / "h.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "angle_radians,count");
  int rows = 0;
  long total = 0;
  while (std::getline(in, line)) {
    ++rows;
    total += std::stol(line.substr(line.find(',') + 1));
  }
  CHECK(rows == 36);
  CHECK(total == 2 * 1500);
}

TEST_CASE("coverage subcommand writes a consistent report")
{
  TempDir dir;
  Json config = to_json(CoverageConfig{});
  config["n"] = 3;
  config["N"] = 40;
  config["replications"] = 3;
  config["seed"] = 5;
  config["chain"]["block_size"] = 2000;
  config["chain"]["max_iters"] = 4000;
  write_json_file(dir / "exp.json", config);
  REQUIRE(cli({"coverage", "--config", dir / "exp.json", "--jobs", "2", "--out", dir / "report.json"}).code == 0);
  const Json report = read_json_file(dir / "report.json");
  for (const char* key : {"family", "algorithm", "n", "m", "N", "noise_param", "replications", "coverage",
                          "alpha_rms_mean", "alpha_rms_sd", "wall_clock_s", "per_replication"})
    CHECK(report.contains(key));
  int contained = 0;
  for (const auto& rep : report["per_replication"]) {
    contained += rep["contained"].get<bool>() ? 1 : 0;
    CHECK(rep.contains("alpha_rms"));
    CHECK(rep.contains("psrf_final"));
    CHECK(rep.contains("iters"));
  }
  CHECK(report["replications"].get<int>() == 3);
  CHECK(report["coverage"].get<double>() == contained / 3.0);
}
