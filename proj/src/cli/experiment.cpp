#include "pfedsop/cli/experiment.hpp"

#include <fstream>
#include <system_error>

#include "pfedsop/error.hpp"
#include "pfedsop/metrics/metrics.hpp"

namespace pfedsop::cli {
namespace {

using numkit::RngStream;
using numkit::StreamDomain;

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

data::LabeledDataset build_dataset(const ExperimentConfig& config) {
  if (config.dataset.kind == DatasetKind::kCsv) return data::load_csv(config.dataset.path);
  data::SynthesisParams params;
  params.num_classes = config.dataset.num_classes;
  params.input_dim = config.dataset.input_dim;
  params.samples_per_class = config.dataset.samples_per_class;
  params.class_separation = config.dataset.separation;
  RngStream rng(config.hyper.seed, {StreamDomain::kSynthesis, 0, 0});
  return data::synthesize_classification(params, rng);
}

PreparedExperiment prepare_experiment(const ExperimentConfig& config) {
  validate(config);
  PreparedExperiment prep;
  prep.dataset = build_dataset(config);
  data::validate(prep.dataset);

  RngStream partition_rng(config.hyper.seed, {StreamDomain::kPartition, 0, 0});
  if (config.partition.kind == PartitionKind::kDirichlet) {
    // Two samples per client so the train/test split leaves both sides nonempty.
    prep.partition = data::dirichlet_partition(prep.dataset, config.clients,
                                               config.partition.alpha, partition_rng, 2);
  } else {
    std::size_t shard = config.partition.shard_size;
    if (shard == 0) {
      shard = prep.dataset.size() / (config.clients * config.partition.shards_per_client);
      if (shard == 0) {
        throw InfeasiblePartitionError("dataset too small for " + std::to_string(config.clients) +
                                       " clients with " +
                                       std::to_string(config.partition.shards_per_client) +
                                       " shards each");
      }
    }
    prep.partition = data::pathological_partition(prep.dataset, config.clients, shard,
                                                  config.partition.shards_per_client, partition_rng);
  }

  RngStream split_rng(config.hyper.seed, {StreamDomain::kSplit, 0, 0});
  prep.split = data::split_train_test(prep.partition, split_rng);

  prep.model.kind = config.model.kind;
  prep.model.input_dim = prep.dataset.input_dim();
  prep.model.hidden_dim = config.model.kind == models::ModelKind::kMlp ? config.model.hidden_dim : 0;
  prep.model.num_classes = std::max<std::size_t>(prep.dataset.class_count, 2);

  prep.federation.objective = std::make_shared<models::ClassifierObjective>(prep.model);
  prep.federation.clients.reserve(config.clients);
  for (const auto& cs : prep.split.clients) {
    prep.federation.clients.push_back(
        {data::gather(prep.dataset, cs.train), data::gather(prep.dataset, cs.test)});
  }
  return prep;
}

RunArtifacts run_in_memory(const ExperimentConfig& config, const fedcore::RunOptions& options) {
  const auto prep = prepare_experiment(config);
  RunArtifacts artifacts;
  artifacts.result = fedcore::run_experiment(prep.federation, config.hyper, options);
  artifacts.metrics_csv = metrics::metrics_csv(artifacts.result.rounds);
  artifacts.summary_csv = metrics::summary_csv(artifacts.result.rounds);
  artifacts.best_csv = metrics::best_table_csv(artifacts.result.best);
  artifacts.resolved_config = serialize_config(config);
  return artifacts;
}

void write_artifacts(const std::filesystem::path& dir, const RunArtifacts& artifacts) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error("cannot create output directory " + dir.string() +
                (ec ? ": " + ec.message() : std::string()));
  }

  const std::pair<const char*, const std::string*> files[] = {
      {kMetricsFile, &artifacts.metrics_csv},
      {kSummaryFile, &artifacts.summary_csv},
      {kBestFile, &artifacts.best_csv},
      {kResolvedConfigFile, &artifacts.resolved_config},
  };
  std::vector<fs::path> temps;
  std::size_t renamed = 0;
  try {
    for (const auto& [name, contents] : files) {
      temps.push_back(dir / (std::string(".") + name + ".tmp"));
      write_file(temps.back(), *contents);
    }
    for (; renamed < temps.size(); ++renamed) {
      fs::rename(temps[renamed], dir / files[renamed].first);
    }
  } catch (const std::exception& e) {
    // Leave either the full set of results or none of it.
    for (const auto& t : temps) fs::remove(t, ec);
    for (std::size_t i = 0; i < renamed; ++i) fs::remove(dir / files[i].first, ec);
    throw Error(std::string("writing results failed: ") + e.what());
  }
}

RunArtifacts run(const ExperimentConfig& config, const fedcore::RunOptions& options) {
  auto artifacts = run_in_memory(config, options);
  write_artifacts(config.output_dir, artifacts);
  return artifacts;
}

}  // namespace pfedsop::cli
