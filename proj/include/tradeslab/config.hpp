#pragma once

#include <json.hpp>

#include "tradeslab/train.hpp"

namespace tradeslab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DatasetSpec {
  std::string type = "blobs";  // "blobs" or "csv"
  std::size_t classes = 20;
  std::size_t per_class = 250;
  std::size_t dim = 32;
  double spread = 0.1;
  std::uint64_t seed = 1;
  std::string path;  // csv only
};

// JSON document mirroring TrainConfig plus dataset, split and evaluation
// settings. Unknown keys are rejected; the resolved form makes every default
// explicit.
struct ExperimentConfig {
  DatasetSpec dataset;
  SplitFractions split_fractions;
  std::uint64_t split_seed = 2;
  TrainConfig train;
  int square_queries = 300;
  double masking_threshold = 0.08;
  double landscape_range = 0.0;  // 0 -> use attack epsilon
  int landscape_resolution = 21;
};

ExperimentConfig parse_config_json(const nlohmann::json& j);
ExperimentConfig parse_config_file(const std::string& path);

nlohmann::json resolved_json(const ExperimentConfig& cfg);

// FNV-1a 64 over the resolved JSON text.
std::string config_digest(const ExperimentConfig& cfg);

Dataset build_dataset(const DatasetSpec& spec);

}  // namespace tradeslab
