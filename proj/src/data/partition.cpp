#include "pfedsop/data/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pfedsop/error.hpp"

namespace pfedsop::data {
namespace {

// Integer counts summing to `total`, proportional to `weights` (which sum
// to 1). Leftover units go to the largest fractional parts, lowest index
// first on ties.
std::vector<std::size_t> largest_remainder(const std::vector<double>& weights, std::size_t total) {
  const std::size_t k = weights.size();
  std::vector<std::size_t> counts(k);
  std::vector<double> remainders(k);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double quota = weights[i] * static_cast<double>(total);
    counts[i] = static_cast<std::size_t>(std::floor(quota));
    remainders[i] = quota - std::floor(quota);
    assigned += counts[i];
  }
  // Rounding of the weights can push the floors above total in degenerate
  // cases; trim from the largest counts.
  while (assigned > total) {
    const auto it = std::max_element(counts.begin(), counts.end());
    --*it;
    --assigned;
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t i = 0; assigned < total; i = (i + 1) % k, ++assigned) ++counts[order[i]];
  return counts;
}

}  // namespace

PartitionPlan dirichlet_partition(const LabeledDataset& ds, std::size_t clients, double alpha,
                                  numkit::RngStream& rng, std::size_t min_per_client) {
  if (clients == 0) throw ParameterError("dirichlet_partition: K must be >= 1");
  if (!(alpha > 0.0)) throw ParameterError("dirichlet_partition: alpha must be > 0");
  if (min_per_client == 0) throw ParameterError("dirichlet_partition: min_per_client must be >= 1");
  validate(ds);
  if (ds.size() < clients * min_per_client) {
    throw DataError("dirichlet_partition: " + std::to_string(ds.size()) +
                    " samples cannot give " + std::to_string(clients) + " clients " +
                    std::to_string(min_per_client) + " each");
  }

  std::vector<std::vector<std::size_t>> by_class(ds.class_count);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);
  }

  PartitionPlan plan;
  plan.assignments.resize(clients);
  for (auto& members : by_class) {
    if (members.empty()) continue;
    rng.shuffle(members);
    const auto proportions = numkit::dirichlet_draw(alpha, clients, rng);
    const auto counts = largest_remainder(proportions, members.size());
    std::size_t next = 0;
    for (std::size_t c = 0; c < clients; ++c) {
      for (std::size_t j = 0; j < counts[c]; ++j) plan.assignments[c].push_back(members[next++]);
    }
  }

  for (std::size_t c = 0; c < clients; ++c) {
    while (plan.assignments[c].size() < min_per_client) {
      auto largest = std::max_element(
          plan.assignments.begin(), plan.assignments.end(),
          [](const auto& a, const auto& b) { return a.size() < b.size(); });
      plan.assignments[c].push_back(largest->back());
      largest->pop_back();
    }
  }
  for (auto& list : plan.assignments) std::sort(list.begin(), list.end());
  return plan;
}

PartitionPlan pathological_partition(const LabeledDataset& ds, std::size_t clients,
                                     std::size_t shard_size, std::size_t shards_per_client,
                                     numkit::RngStream& rng) {
  if (clients == 0) throw ParameterError("pathological_partition: K must be >= 1");
  if (shard_size == 0) throw ParameterError("pathological_partition: shard size must be >= 1");
  if (shards_per_client == 0) {
    throw ParameterError("pathological_partition: shards per client must be >= 1");
  }
  validate(ds);

  std::vector<std::size_t> sorted(ds.size());
  std::iota(sorted.begin(), sorted.end(), 0);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [&](std::size_t a, std::size_t b) { return ds.labels[a] < ds.labels[b]; });

  const std::size_t shard_count = ds.size() / shard_size;
  const std::size_t needed = clients * shards_per_client;
  if (shard_count < needed) {
    throw InfeasiblePartitionError("pathological_partition: " + std::to_string(shard_count) +
                                   " shards of size " + std::to_string(shard_size) +
                                   " but K*b = " + std::to_string(needed));
  }

  std::vector<std::size_t> shards(shard_count);
  std::iota(shards.begin(), shards.end(), 0);
  rng.shuffle(shards);

  PartitionPlan plan;
  plan.assignments.resize(clients);
  for (std::size_t c = 0; c < clients; ++c) {
    auto& list = plan.assignments[c];
    for (std::size_t s = 0; s < shards_per_client; ++s) {
      const std::size_t shard = shards[c * shards_per_client + s];
      for (std::size_t j = 0; j < shard_size; ++j) list.push_back(sorted[shard * shard_size + j]);
    }
    std::sort(list.begin(), list.end());
  }
  return plan;
}

SplitPlan split_train_test(const PartitionPlan& plan, numkit::RngStream& rng, double train_ratio) {
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
    throw ParameterError("split_train_test: ratio must be in (0, 1)");
  }
  SplitPlan split;
  split.clients.reserve(plan.client_count());
  for (std::size_t c = 0; c < plan.client_count(); ++c) {
    auto members = plan.assignments[c];
    const std::size_t n = members.size();
    if (n < 2) {
      throw DataError("split_train_test: client " + std::to_string(c) + " has " +
                      std::to_string(n) + " sample(s), need at least 2");
    }
    rng.shuffle(members);
    auto n_train = static_cast<std::size_t>(std::llround(train_ratio * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    ClientSplit cs;
    cs.train.assign(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_train));
    cs.test.assign(members.begin() + static_cast<std::ptrdiff_t>(n_train), members.end());
    split.clients.push_back(std::move(cs));
  }
  return split;
}

void check_partition(const PartitionPlan& plan, std::size_t dataset_size) {
  std::vector<bool> seen(dataset_size, false);
  for (std::size_t c = 0; c < plan.client_count(); ++c) {
    if (plan.assignments[c].empty()) {
      throw DataError("partition: client " + std::to_string(c) + " is empty");
    }
    for (std::size_t idx : plan.assignments[c]) {
      if (idx >= dataset_size) throw DataError("partition: index out of range");
      if (seen[idx]) throw DataError("partition: index " + std::to_string(idx) + " assigned twice");
      seen[idx] = true;
    }
  }
}

}  // namespace pfedsop::data
