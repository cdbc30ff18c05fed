#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <vector>

#include "doctest.h"
#include "pfedsop/data/dataset.hpp"
#include "pfedsop/data/partition.hpp"
#include "pfedsop/error.hpp"
#include "pfedsop/models/classifier.hpp"

using namespace pfedsop;
using namespace pfedsop::data;
using numkit::RngStream;
using numkit::StreamDomain;

namespace {

LabeledDataset labelled(std::vector<int> labels, std::size_t classes) {
  LabeledDataset ds;
  ds.samples = Matrix(labels.size(), 1);
  for (std::size_t i = 0; i < labels.size(); ++i) ds.samples(i, 0) = static_cast<double>(i);
  ds.labels = std::move(labels);
  ds.class_count = classes;
  return ds;
}

LabeledDataset blocks(std::size_t classes, std::size_t per_class) {
  std::vector<int> labels;
  for (std::size_t c = 0; c < classes; ++c) labels.insert(labels.end(), per_class, static_cast<int>(c));
  return labelled(std::move(labels), classes);
}

Batch as_batch(const LabeledDataset& ds) { return Batch{ds.samples, ds.labels}; }

// Full-batch gradient descent on a logistic regression; returns the params.
numkit::ParamVector train_logistic(const LabeledDataset& ds, std::size_t steps, double lr) {
  const models::ModelSpec spec{models::ModelKind::kLogisticRegression, ds.input_dim(), 0,
                               ds.class_count};
  numkit::ParamVector p(models::parameter_count(spec));
  const auto batch = as_batch(ds);
  for (std::size_t s = 0; s < steps; ++s) numkit::axpy(-lr, models::gradient(spec, p, batch), p);
  return p;
}

double entropy(const std::vector<double>& counts) {
  double total = 0.0;
  for (double c : counts) total += c;
  double h = 0.0;
  for (double c : counts) {
    if (c > 0) h -= (c / total) * std::log(c / total);
  }
  return h;
}

void check_disjoint(const PartitionPlan& plan, std::size_t n) {
  std::set<std::size_t> seen;
  for (const auto& list : plan.assignments) {
    CHECK_FALSE(list.empty());
    for (auto i : list) {
      CHECK(i < n);
      CHECK(seen.insert(i).second);
    }
  }
  CHECK_NOTHROW(check_partition(plan, n));
}

}  // namespace

TEST_CASE("synthetic blobs: shape and determinism") {
  SynthesisParams params{3, 4, 25, 2.0};
  RngStream a(5, {StreamDomain::kSynthesis, 0, 0});
  RngStream b(5, {StreamDomain::kSynthesis, 0, 0});
  const auto ds = synthesize_classification(params, a);
  CHECK(ds.size() == 75);
  CHECK(ds.input_dim() == 4);
  CHECK(ds.class_count == 3);
  CHECK(ds.labels[0] == 0);
  CHECK(ds.labels[74] == 2);
  CHECK(ds == synthesize_classification(params, b));
}

TEST_CASE("well separated blobs are learnable") {
  RngStream rng(0, {StreamDomain::kSynthesis, 0, 0});
  const auto ds = synthesize_classification({2, 5, 100, 10.0}, rng);
  const auto p = train_logistic(ds, 200, 0.5);
  const models::ModelSpec spec{models::ModelKind::kLogisticRegression, 5, 0, 2};
  CHECK(models::evaluate(spec, p, as_batch(ds)).accuracy >= 0.99);
}

TEST_CASE("zero separation stays at chance on fresh samples") {
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    RngStream train_rng(seed, {StreamDomain::kSynthesis, 0, 0});
    RngStream test_rng(seed, {StreamDomain::kSynthesis, 1, 0});
    const SynthesisParams params{10, 20, 200, 0.0};
    const auto train = synthesize_classification(params, train_rng);
    const auto test = synthesize_classification(params, test_rng);
    const auto p = train_logistic(train, 200, 0.5);
    const models::ModelSpec spec{models::ModelKind::kLogisticRegression, 20, 0, 10};
    total += models::evaluate(spec, p, as_batch(test)).accuracy;
  }
  CHECK(std::abs(total / 5.0 - 0.1) <= 0.05);
}

TEST_CASE("csv parsing") {
  const auto a = parse_csv("1,0.5,0.5\n0,1.0,2.0");
  CHECK(a.size() == 2);
  CHECK(a.input_dim() == 2);
  CHECK(a.labels == std::vector<int>{1, 0});
  CHECK(a.class_count == 2);
  CHECK(a.samples(1, 1) == 2.0);

  const auto b = parse_csv("label,x,y\n0,1,2\n1,3,4\n\n2,5,6\n");
  CHECK(b.size() == 3);
  CHECK(b.class_count == 3);

  try {
    parse_csv("0,1,2\n1,3\n0,4,5\n");
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(e.line() == 2);
  }
  try {
    parse_csv("label,x\n0,1\n1,abc\n");
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_csv(""), FormatError);
  CHECK_THROWS_AS(parse_csv("-1,0.5\n"), FormatError);
}

TEST_CASE("csv loading from disk") {
  const auto path = std::filesystem::temp_directory_path() / "pfedsop_test_data.csv";
  {
    std::ofstream out(path);
    out << "label,a,b\n0,1,2\n1,3,4\n1,5,6\n";
  }
  const auto ds = load_csv(path);
  CHECK(ds.size() == 3);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_csv(path), Error);
}

TEST_CASE("dirichlet partition with K = 1 keeps everything") {
  const auto ds = blocks(3, 10);
  RngStream rng(0, {StreamDomain::kPartition, 0, 0});
  const auto plan = dirichlet_partition(ds, 1, 0.07, rng);
  REQUIRE(plan.client_count() == 1);
  CHECK(plan.assignments[0].size() == 30);
}

TEST_CASE("dirichlet partition errors") {
  const auto ds = blocks(2, 2);
  RngStream rng(0, {StreamDomain::kPartition, 0, 0});
  CHECK_THROWS_AS(dirichlet_partition(ds, 5, 0.5, rng), DataError);
  CHECK_THROWS_AS(dirichlet_partition(ds, 2, 0.0, rng), ParameterError);
}

TEST_CASE("dirichlet partition concentrates at large alpha") {
  const auto ds = blocks(2, 1000);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    RngStream rng(seed, {StreamDomain::kPartition, 0, 0});
    const auto plan = dirichlet_partition(ds, 2, 1e6, rng);
    check_disjoint(plan, ds.size());
    for (const auto& list : plan.assignments) {
      for (int c = 0; c < 2; ++c) {
        const auto n = std::count_if(list.begin(), list.end(),
                                     [&](std::size_t i) { return ds.labels[i] == c; });
        CHECK(std::abs(static_cast<double>(n) - 500.0) <= 25.0);
      }
    }
  }
}

TEST_CASE("dirichlet partition at low alpha is heterogeneous") {
  const auto ds = blocks(10, 100);
  std::vector<double> global(10, 100.0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    RngStream rng(seed, {StreamDomain::kPartition, 0, 0});
    const auto plan = dirichlet_partition(ds, 20, 0.07, rng);
    check_disjoint(plan, ds.size());
    std::size_t covered = 0;
    double mean_h = 0.0;
    for (const auto& list : plan.assignments) {
      covered += list.size();
      std::vector<double> counts(10, 0.0);
      for (auto i : list) counts[static_cast<std::size_t>(ds.labels[i])] += 1.0;
      mean_h += entropy(counts) / 20.0;
    }
    CHECK(covered == ds.size());
    CHECK(mean_h < entropy(global));
  }
}

TEST_CASE("pathological partition on the tiny instance") {
  const auto ds = blocks(2, 5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RngStream rng(seed, {StreamDomain::kPartition, 0, 0});
    const auto plan = pathological_partition(ds, 5, 2, 1, rng);
    check_disjoint(plan, ds.size());
    int single_class = 0;
    for (const auto& list : plan.assignments) {
      CHECK(list.size() == 2);
      if (ds.labels[list[0]] == ds.labels[list[1]]) ++single_class;
    }
    CHECK(single_class == 4);
  }
}

TEST_CASE("pathological partition: exact deal and class bound") {
  const auto ds = blocks(10, 40);  // 400 samples, z = 10 -> 40 shards
  RngStream rng(3, {StreamDomain::kPartition, 0, 0});
  const auto plan = pathological_partition(ds, 20, 10, 2, rng);
  check_disjoint(plan, ds.size());
  std::size_t total = 0;
  for (const auto& list : plan.assignments) {
    CHECK(list.size() == 20);
    total += list.size();
    std::set<int> classes;
    for (auto i : list) classes.insert(ds.labels[i]);
    CHECK(classes.size() <= 2);
  }
  CHECK(total == 400);
}

TEST_CASE("pathological partition drops the remainder and checks feasibility") {
  const auto ds = blocks(2, 7);  // 14 samples, z = 4 -> 3 shards, 2 dropped
  RngStream rng(0, {StreamDomain::kPartition, 0, 0});
  const auto plan = pathological_partition(ds, 3, 4, 1, rng);
  check_disjoint(plan, ds.size());
  std::set<std::size_t> used;
  for (const auto& list : plan.assignments) used.insert(list.begin(), list.end());
  CHECK(used.size() == 12);
  CHECK(used.count(12) == 0);
  CHECK(used.count(13) == 0);
  CHECK_THROWS_AS(pathological_partition(ds, 4, 4, 1, rng), InfeasiblePartitionError);
}

TEST_CASE("train/test split sizes and determinism") {
  PartitionPlan plan;
  plan.assignments = {{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, {10, 11, 12, 13, 14}};
  RngStream a(1, {StreamDomain::kSplit, 0, 0});
  RngStream b(1, {StreamDomain::kSplit, 0, 0});
  const auto split = split_train_test(plan, a);
  CHECK(split.clients[0].train.size() == 8);
  CHECK(split.clients[0].test.size() == 2);
  CHECK(split.clients[1].train.size() == 4);
  CHECK(split.clients[1].test.size() == 1);
  CHECK(split == split_train_test(plan, b));

  for (std::size_t c = 0; c < 2; ++c) {
    std::vector<std::size_t> all = split.clients[c].train;
    all.insert(all.end(), split.clients[c].test.begin(), split.clients[c].test.end());
    std::sort(all.begin(), all.end());
    CHECK(all == plan.assignments[c]);
  }

  plan.assignments = {{0}};
  CHECK_THROWS_AS(split_train_test(plan, a), DataError);
}

TEST_CASE("dirichlet repair tops clients up to the requested minimum") {
  const auto ds = blocks(10, 30);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RngStream a(seed, {StreamDomain::kPartition, 0, 0});
    RngStream b(seed, {StreamDomain::kPartition, 0, 0});
    const auto one = dirichlet_partition(ds, 40, 0.01, a);
    const auto two = dirichlet_partition(ds, 40, 0.01, b, 2);
    check_disjoint(one, ds.size());
    check_disjoint(two, ds.size());
    for (const auto& list : two.assignments) CHECK(list.size() >= 2);
  }
  RngStream rng(0, {StreamDomain::kPartition, 0, 0});
  CHECK_THROWS_AS(dirichlet_partition(ds, 200, 0.5, rng, 2), DataError);
  CHECK_THROWS_AS(dirichlet_partition(ds, 2, 0.5, rng, 0), ParameterError);
}
