#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pfedsop/cli/config.hpp"
#include "pfedsop/data/dataset.hpp"
#include "pfedsop/data/partition.hpp"
#include "pfedsop/fedcore/federation.hpp"

namespace pfedsop::cli {

/// Dataset, partition and split produced from a config, plus the per-client
/// rows handed to the federated loop.
struct PreparedExperiment {
  data::LabeledDataset dataset;
  data::PartitionPlan partition;
  data::SplitPlan split;
  models::ModelSpec model;
  fedcore::Federation federation;
};

data::LabeledDataset build_dataset(const ExperimentConfig& config);
PreparedExperiment prepare_experiment(const ExperimentConfig& config);

/// Output files, in the order they are committed.
inline constexpr const char* kMetricsFile = "metrics.csv";
inline constexpr const char* kSummaryFile = "summary.csv";
inline constexpr const char* kBestFile = "best_accuracy.csv";
inline constexpr const char* kResolvedConfigFile = "config.resolved";

struct RunArtifacts {
  std::string metrics_csv;
  std::string summary_csv;
  std::string best_csv;
  std::string resolved_config;
  fedcore::ExperimentResult result;
};

/// Runs the experiment in memory.
RunArtifacts run_in_memory(const ExperimentConfig& config, const fedcore::RunOptions& options = {});

/// Writes each file to a temporary sibling and renames it into place only
/// after all four were written. On failure, temporaries are removed and an
/// Error is thrown.
void write_artifacts(const std::filesystem::path& dir, const RunArtifacts& artifacts);

/// run_in_memory + write_artifacts into config.output_dir.
RunArtifacts run(const ExperimentConfig& config, const fedcore::RunOptions& options = {});

}  // namespace pfedsop::cli
