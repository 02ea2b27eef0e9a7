#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "bayesio/datagen.hpp"
#include "bayesio/forward.hpp"
#include "bayesio/samplers.hpp"
#include "bayesio/uncertainty.hpp"

namespace bayesio
{

using Json = nlohmann::json;

// Matrices are written row-major as arrays of rows. Doubles round-trip
// exactly through the shortest-representation formatter.
Json to_json(const Eigen::VectorXd& v);
Json to_json(const Eigen::MatrixXd& M);
Eigen::VectorXd vector_from_json(const Json& j);
Eigen::MatrixXd matrix_from_json(const Json& j);

Json to_json(const ForwardInstance& inst);
ForwardInstance instance_from_json(const Json& j);

Json to_json(const Dataset& data);
Dataset dataset_from_json(const Json& j);

Json to_json(const CredibleRegion& region);
CredibleRegion region_from_json(const Json& j);

Json to_json(const ChainConfig& cfg);
/// Fields missing from `j` keep their values in `base`.
ChainConfig chain_config_from_json(const Json& j, ChainConfig base = {});

Json to_json(const Priors& priors);
Priors priors_from_json(const Json& j, Priors base = {});

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const std::filesystem::path& path, const Dataset& data);

/// Header iter,theta_1..theta_h,nuisance,accepted_theta,accepted_nuisance.
void write_trace_csv(const std::filesystem::path& path, const Trace& trace);
Trace read_trace_csv(const std::filesystem::path& path);

/// Every chain_*.csv in `dir`, in chain-index order.
std::vector<Trace> read_trace_dir(const std::filesystem::path& dir);
std::filesystem::path trace_file_name(std::size_t chain_index);

}  // namespace bayesio
