#pragma once

#include <cstddef>
#include <vector>

#include "pfedsop/data/dataset.hpp"
#include "pfedsop/numkit/rng.hpp"

namespace pfedsop::data {

/// Sample indices owned by each client. Lists are pairwise disjoint and
/// nonempty; together they cover a subset of [0, N).
struct PartitionPlan {
  std::vector<std::vector<std::size_t>> assignments;

  std::size_t client_count() const noexcept { return assignments.size(); }
  friend bool operator==(const PartitionPlan&, const PartitionPlan&) = default;
};

struct ClientSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  friend bool operator==(const ClientSplit&, const ClientSplit&) = default;
};

struct SplitPlan {
  std::vector<ClientSplit> clients;
  friend bool operator==(const SplitPlan&, const SplitPlan&) = default;
};

/// Per class: draw p ~ Dir(alpha * 1_K), shuffle the class's samples and deal
/// them out in proportion to p using largest-remainder rounding. A client
/// left with fewer than `min_per_client` samples then takes samples, one at
/// a time, from the currently largest client. Throws DataError when
/// N < K * min_per_client, ParameterError for bad K/alpha.
PartitionPlan dirichlet_partition(const LabeledDataset& ds, std::size_t clients, double alpha,
                                  numkit::RngStream& rng, std::size_t min_per_client = 1);

/// Label-sorted shards of `shard_size` samples (remainder dropped), shuffled
/// and dealt `shards_per_client` to each client. Throws
/// InfeasiblePartitionError when there are fewer than K*b shards.
PartitionPlan pathological_partition(const LabeledDataset& ds, std::size_t clients,
                                     std::size_t shard_size, std::size_t shards_per_client,
                                     numkit::RngStream& rng);

/// Shuffles each client's samples and keeps round(ratio * n) for training,
/// leaving at least one for testing. Throws DataError for clients with < 2
/// samples.
SplitPlan split_train_test(const PartitionPlan& plan, numkit::RngStream& rng,
                           double train_ratio = 0.8);

/// Checks disjointness, nonemptiness and index range; throws DataError.
void check_partition(const PartitionPlan& plan, std::size_t dataset_size);

}  // namespace pfedsop::data
