#include "bayesio/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>

namespace bayesio
{

namespace fs = std::filesystem;

namespace
{

[[noreturn]] void bad_format(const std::string& what)
{
  throw Error(ErrorKind::Io, what);
}

const Json& field(const Json& j, const char* key)
{
  if (!j.is_object() || !j.contains(key))
    bad_format(std::string("missing field '") + key + "'");
  return j.at(key);
}

double number(const Json& j)
{
  if (!j.is_number())
    bad_format("expected a number");
  return j.get<double>();
}

}  // namespace

Json to_json(const Eigen::VectorXd& v)
{
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out.push_back(v[i]);
  return out;
}

Json to_json(const Eigen::MatrixXd& M)
{
  Json out = Json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r)
    out.push_back(to_json(Eigen::VectorXd(M.row(r).transpose())));
  return out;
}

Eigen::VectorXd vector_from_json(const Json& j)
{
  if (!j.is_array())
    bad_format("expected an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = number(j[i]);
  return v;
}

Eigen::MatrixXd matrix_from_json(const Json& j)
{
  if (!j.is_array())
    bad_format("expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::VectorXd row = vector_from_json(j[static_cast<std::size_t>(r)]);
    if (row.size() != cols)
      bad_format("ragged matrix");
    M.row(r) = row.transpose();
  }
  return M;
}

Json to_json(const ForwardInstance& inst)
{
  if (const auto* lp = std::get_if<LpInstance>(&inst))
    return {{"kind", "lp"}, {"A", to_json(lp->A)}, {"b", to_json(lp->b)}};
  return {{"kind", "qp"}, {"Q", to_json(std::get<QpInstance>(inst).Q())}};
}

ForwardInstance instance_from_json(const Json& j)
{
  const std::string kind = field(j, "kind").get<std::string>();
  if (kind == "lp") {
    LpInstance lp{matrix_from_json(field(j, "A")), vector_from_json(field(j, "b"))};
    if (lp.A.rows() != lp.b.size())
      bad_format("LP instance: A and b disagree");
    return lp;
  }
  if (kind == "qp")
    return QpInstance(matrix_from_json(field(j, "Q")));
  bad_format("unknown instance kind '" + kind + "'");
}

Json to_json(const Dataset& data)
{
  Json records = Json::array();
  for (std::size_t i = 0; i < data.size(); ++i)
    records.push_back({{"instance", to_json(data.instances[i])}, {"y", to_json(data.observations[i])}});
  return {{"family", to_string(data.family)},
          {"error_model", to_string(data.error_model)},
          {"noise_param", data.noise_param},
          {"theta_star", to_json(data.theta_star)},
          {"seed", data.seed},
          {"records", std::move(records)}};
}

Dataset dataset_from_json(const Json& j)
{
  Dataset data;
  data.error_model = parse_error_model(field(j, "error_model").get<std::string>());
  data.noise_param = number(field(j, "noise_param"));
  data.theta_star = vector_from_json(field(j, "theta_star"));
  data.seed = field(j, "seed").get<std::uint64_t>();
  for (const auto& rec : field(j, "records")) {
    data.instances.push_back(instance_from_json(field(rec, "instance")));
    data.observations.push_back(vector_from_json(field(rec, "y")));
  }
  if (j.contains("family")) {
    data.family = parse_family(j.at("family").get<std::string>());
  } else if (!data.instances.empty()) {
    data.family = std::holds_alternative<LpInstance>(data.instances.front()) ? Family::Lp : Family::Qp;
  }
  return data;
}

Json to_json(const CredibleRegion& region)
{
  return {{"mean_dir", to_json(region.mean_dir.coords())},
          {"tangent_mean", to_json(region.tangent_mean)},
          {"cov", to_json(region.cov)},
          {"q", region.q},
          {"alpha", region.alpha},
          {"epsilon", region.epsilon}};
}

CredibleRegion region_from_json(const Json& j)
{
  CredibleRegion region{UnitVector::from_unit(vector_from_json(field(j, "mean_dir")), 1e-9),
                        vector_from_json(field(j, "tangent_mean")),
                        matrix_from_json(field(j, "cov")),
                        number(field(j, "q")),
                        number(field(j, "alpha")),
                        number(field(j, "epsilon"))};
  const Eigen::Index h = region.mean_dir.size();
  if (region.tangent_mean.size() != h || region.cov.rows() != h || region.cov.cols() != h)
    bad_format("region fields disagree in dimension");
  return region;
}

Json to_json(const ChainConfig& cfg)
{
  return {{"n_chains", cfg.n_chains},
          {"block_size", cfg.block_size},
          {"max_iters", cfg.max_iters},
          {"warmup_fraction", cfg.warmup_fraction},
          {"psrf_threshold", cfg.psrf_threshold},
          {"target_accept", {cfg.target_accept.first, cfg.target_accept.second}},
          {"seed", cfg.seed},
          {"adapt_interval", cfg.adapt_interval}};
}

ChainConfig chain_config_from_json(const Json& j, ChainConfig cfg)
{
  if (!j.is_object())
    bad_format("chain config must be an object");
  cfg.n_chains = j.value("n_chains", cfg.n_chains);
  cfg.block_size = j.value("block_size", cfg.block_size);
  cfg.max_iters = j.value("max_iters", cfg.max_iters);
  cfg.warmup_fraction = j.value("warmup_fraction", cfg.warmup_fraction);
  cfg.psrf_threshold = j.value("psrf_threshold", cfg.psrf_threshold);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.adapt_interval = j.value("adapt_interval", cfg.adapt_interval);
  if (j.contains("target_accept")) {
    const auto& t = j.at("target_accept");
    if (!t.is_array() || t.size() != 2)
      bad_format("target_accept must be [lo, hi]");
    cfg.target_accept = {number(t[0]), number(t[1])};
  }
  return cfg;
}

Json to_json(const Priors& priors)
{
  return {{"half_cauchy_scale", priors.half_cauchy_scale},
          {"gamma_shape", priors.gamma_shape},
          {"gamma_rate", priors.gamma_rate}};
}

Priors priors_from_json(const Json& j, Priors priors)
{
  if (!j.is_object())
    bad_format("priors must be an object");
  priors.half_cauchy_scale = j.value("half_cauchy_scale", priors.half_cauchy_scale);
  priors.gamma_shape = j.value("gamma_shape", priors.gamma_shape);
  priors.gamma_rate = j.value("gamma_rate", priors.gamma_rate);
  return priors;
}

Json read_json_file(const fs::path& path)
{
  std::ifstream in(path);
  if (!in)
    bad_format("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    bad_format(path.string() + ": " + e.what());
  }
}

void write_json_file(const fs::path& path, const Json& j)
{
  std::ofstream out(path);
  if (!out)
    bad_format("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out)
    bad_format("write failed: " + path.string());
}

Dataset load_dataset(const fs::path& path)
{
  try {
    return dataset_from_json(read_json_file(path));
  } catch (const Json::exception& e) {
    bad_format(path.string() + ": " + e.what());
  }
}

void save_dataset(const fs::path& path, const Dataset& data)
{
  write_json_file(path, to_json(data));
}

void write_trace_csv(const fs::path& path, const Trace& trace)
{
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f)
    bad_format("cannot write " + path.string());
  const Eigen::Index h = trace.theta.rows();
  std::fputs("iter", f);
  for (Eigen::Index k = 1; k <= h; ++k)
    std::fprintf(f, ",theta_%ld", static_cast<long>(k));
  std::fputs(",nuisance,accepted_theta,accepted_nuisance\n", f);
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const auto col = static_cast<Eigen::Index>(t);
    std::fprintf(f, "%zu", trace.first_iteration + t);
    for (Eigen::Index k = 0; k < h; ++k)
      std::fprintf(f, ",%.17g", trace.theta(k, col));
    std::fprintf(f, ",%.17g,%d,%d\n", trace.nuisance[col], trace.accepted_theta[t],
                 trace.accepted_nuisance[t]);
  }
  const bool failed = std::ferror(f) != 0;
  if (std::fclose(f) != 0 || failed)
    bad_format("write failed: " + path.string());
}

Trace read_trace_csv(const fs::path& path)
{
  std::ifstream in(path);
  if (!in)
    bad_format("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line))
    bad_format(path.string() + ": empty trace");
  const auto columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',') + 1);
  if (columns < 6 || line.rfind("iter,theta_1", 0) != 0)
    bad_format(path.string() + ": unexpected header");
  const std::size_t h = columns - 4;

  std::vector<double> theta;
  std::vector<double> nuisance;
  Trace trace;
  std::vector<double> row(columns);
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (std::size_t c = 0; c < columns; ++c) {
      const auto [next, ec] = std::from_chars(p, end, row[c]);
      if (ec != std::errc())
        bad_format(path.string() + ": bad number in row");
      p = next;
      if (c + 1 < columns) {
        if (p == end || *p != ',')
          bad_format(path.string() + ": short row");
        ++p;
      }
    }
    if (first) {
      trace.first_iteration = static_cast<std::size_t>(row[0]);
      first = false;
    }
    theta.insert(theta.end(), row.begin() + 1, row.begin() + 1 + static_cast<std::ptrdiff_t>(h));
    nuisance.push_back(row[h + 1]);
    trace.accepted_theta.push_back(static_cast<std::uint8_t>(row[h + 2] != 0.0));
    trace.accepted_nuisance.push_back(static_cast<std::uint8_t>(row[h + 3] != 0.0));
  }
  const auto T = static_cast<Eigen::Index>(nuisance.size());
  trace.theta = Eigen::Map<const Eigen::MatrixXd>(theta.data(), static_cast<Eigen::Index>(h), T);
  trace.nuisance = Eigen::Map<const Eigen::VectorXd>(nuisance.data(), T);
  return trace;
}

fs::path trace_file_name(std::size_t chain_index)
{
  return "chain_" + std::to_string(chain_index) + ".csv";
}

std::vector<Trace> read_trace_dir(const fs::path& dir)
{
  std::vector<Trace> out;
  for (std::size_t c = 0;; ++c) {
    const fs::path file = dir / trace_file_name(c);
    if (!fs::exists(file))
      break;
    out.push_back(read_trace_csv(file));
  }
  if (out.empty())
    bad_format("no chain_*.csv traces in " + dir.string());
  return out;
}

}  // namespace bayesio
