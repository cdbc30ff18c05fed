#pragma once

// Flat `key = value` experiment configuration. Nested settings use dotted
// keys (`partition.alpha`). Lines starting with '#' are comments.
//
// Required keys: method, dataset, clients, rounds.
// Every key can be overridden from the environment: PFEDSOP_CFG_ followed by
// the key upper-cased with '.' replaced by '_' (PFEDSOP_CFG_PARTITION_ALPHA).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pfedsop/fedcore/hyperparams.hpp"
#include "pfedsop/models/classifier.hpp"

namespace pfedsop::cli {

enum class DatasetKind { kSynthetic, kCsv };
enum class PartitionKind { kDirichlet, kPathological };

struct DatasetConfig {
  DatasetKind kind = DatasetKind::kSynthetic;
  std::string path;  // csv only
  std::size_t num_classes = 10;
  std::size_t input_dim = 20;
  std::size_t samples_per_class = 200;
  double separation = 2.0;

  friend bool operator==(const DatasetConfig&, const DatasetConfig&) = default;
};

struct PartitionConfig {
  PartitionKind kind = PartitionKind::kDirichlet;
  double alpha = 0.07;
  std::size_t shard_size = 0;  // 0: floor(N / (clients * shards_per_client))
  std::size_t shards_per_client = 2;

  friend bool operator==(const PartitionConfig&, const PartitionConfig&) = default;
};

struct ModelConfig {
  models::ModelKind kind = models::ModelKind::kMlp;
  std::size_t hidden_dim = 32;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  PartitionConfig partition;
  ModelConfig model;
  std::size_t clients = 0;
  fedcore::HyperParams hyper;  // method, rounds, learning rates, seed, ...
  std::string output_dir = "out";

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string& name)>;

/// Reads the process environment.
std::optional<std::string> process_env(const std::string& name);

/// Environment variable name that overrides `key`.
std::string env_var_for(std::string_view key);

/// All recognised keys in canonical order.
const std::vector<std::string_view>& config_keys();

/// Throws ConfigError naming the key on unknown/duplicate/missing keys,
/// unparsable values and range violations.
ExperimentConfig parse_config(std::string_view text, const EnvLookup& env = {});
ExperimentConfig load_config(const std::filesystem::path& path, const EnvLookup& env = {});

/// Every key with its resolved value; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

void validate(const ExperimentConfig& config);

}  // namespace pfedsop::cli
