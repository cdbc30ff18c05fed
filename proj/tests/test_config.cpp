#include <map>
#include <string>

#include "doctest.h"
#include "pfedsop/cli/config.hpp"
#include "pfedsop/error.hpp"

using namespace pfedsop;
using namespace pfedsop::cli;

namespace {

const std::string kMinimal =
    "method = pfedsop\n"
    "dataset = synthetic\n"
    "clients = 20\n"
    "rounds = 10\n";

std::string error_key(const std::string& text, const EnvLookup& env = {}) {
  try {
    parse_config(text, env);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<none>";
}

EnvLookup env_from(std::map<std::string, std::string> vars) {
  return [vars = std::move(vars)](const std::string& name) -> std::optional<std::string> {
    if (auto it = vars.find(name); it != vars.end()) return it->second;
    return std::nullopt;
  };
}

}  // namespace

TEST_CASE("minimal config fills defaults") {
  const auto c = parse_config(kMinimal);
  CHECK(c.hyper.method == fedcore::Method::kPfedsop);
  CHECK(c.dataset.kind == DatasetKind::kSynthetic);
  CHECK(c.clients == 20);
  CHECK(c.hyper.rounds == 10);
  CHECK(c.hyper.rho == 1.0);
  CHECK(c.hyper.lambda == 1.0);
  CHECK(c.hyper.batch_size == 50);
  CHECK(c.hyper.local_epochs == 1);
  CHECK(c.hyper.participation_fraction == 0.2);
  CHECK(c.hyper.eval_point == fedcore::EvalPoint::kPersonalized);
  CHECK(c.hyper.ft_epochs == 1);
  CHECK(c.partition.kind == PartitionKind::kDirichlet);
  CHECK(c.partition.alpha == 0.07);
}

TEST_CASE("comments, whitespace and dotted keys") {
  const auto c = parse_config(
      "# experiment\n"
      "  method=fedprox_ft  \n"
      "dataset = synthetic\n"
      "\n"
      "clients = 10\n"
      "rounds = 3\n"
      "partition = pathological\n"
      "partition.shards_per_client = 3\n"
      "mu = 0.01\n"
      "eval_point = post_sgd\n"
      "model = logistic_regression\n");
  CHECK(c.hyper.method == fedcore::Method::kFedProxFt);
  CHECK(c.partition.kind == PartitionKind::kPathological);
  CHECK(c.partition.shards_per_client == 3);
  CHECK(c.hyper.mu == 0.01);
  CHECK(c.hyper.eval_point == fedcore::EvalPoint::kPostSgd);
  CHECK(c.model.kind == models::ModelKind::kLogisticRegression);
}

TEST_CASE("errors name the offending key") {
  CHECK(error_key(kMinimal + "rho = -1\n") == "rho");
  CHECK(error_key(kMinimal + "lambda = 0\n") == "lambda");
  CHECK(error_key(kMinimal + "eta1 = abc\n") == "eta1");
  CHECK(error_key(kMinimal + "participation_fraction = 1.5\n") == "participation_fraction");
  CHECK(error_key(kMinimal + "batch_size = 0\n") == "batch_size");
  CHECK(error_key(kMinimal + "mu = -0.1\n") == "mu");
  CHECK(error_key(kMinimal + "colour = blue\n") == "colour");
  CHECK(error_key(kMinimal + "clients = 5\n") == "clients");
  CHECK(error_key(kMinimal + "method = ditto\n") == "method");
  CHECK(error_key(kMinimal + "eval_point = sometimes\n") == "eval_point");
  CHECK(error_key(kMinimal + "dataset.path = x.csv\ndataset.separation = -1\n") ==
        "dataset.separation");
  CHECK(error_key("method = pfedsop\ndataset = synthetic\nclients = 4\n") == "rounds");
  CHECK(error_key("dataset = synthetic\nclients = 4\nrounds = 1\n") == "method");
  CHECK(error_key("method = fedavg\ndataset = csv\nclients = 4\nrounds = 1\n") == "dataset.path");
  CHECK(error_key("method = fedavg\ndataset = synthetic\nclients = 4\nrounds = 0\n") == "rounds");
  CHECK(error_key("method = fedavg\ndataset = synthetic\nclients = 2\nrounds = 1\n") ==
        "participation_fraction");
}

TEST_CASE("serialization round-trips") {
  auto c = parse_config(kMinimal + "eta2 = 0.1\nrho = 0.001\nseed = 18446744073709551615\n");
  c.hyper.eta1 = 0.1 + 0.2;  // not exactly representable in short form
  c.dataset.separation = 1.0 / 3.0;
  c.output_dir = "some/dir";
  const auto text = serialize_config(c);
  CHECK(parse_config(text) == c);
  CHECK(serialize_config(parse_config(text)) == text);
  // Every key appears explicitly.
  for (auto key : config_keys()) {
    CHECK(text.find(std::string(key) + " = ") != std::string::npos);
  }
}

TEST_CASE("environment overrides") {
  CHECK(env_var_for("partition.alpha") == "PFEDSOP_CFG_PARTITION_ALPHA");
  CHECK(env_var_for("rho") == "PFEDSOP_CFG_RHO");

  const auto c = parse_config(kMinimal + "rho = 0.5\n",
                              env_from({{"PFEDSOP_CFG_RHO", "0.25"},
                                        {"PFEDSOP_CFG_PARTITION_ALPHA", " 0.3 "},
                                        {"PFEDSOP_OTHER", "x"}}));
  CHECK(c.hyper.rho == 0.25);
  CHECK(c.partition.alpha == 0.3);

  // Required keys may come from the environment alone.
  const auto d = parse_config("method = fedavg\ndataset = synthetic\nclients = 5\n",
                              env_from({{"PFEDSOP_CFG_ROUNDS", "7"}}));
  CHECK(d.hyper.rounds == 7);

  CHECK(error_key(kMinimal, env_from({{"PFEDSOP_CFG_LAMBDA", "-2"}})) == "lambda");
}

TEST_CASE("duplicate keys and bad lines are rejected") {
  CHECK(error_key(kMinimal + "rho = 1\nrho = 2\n") == "rho");
  CHECK_THROWS_AS(parse_config(kMinimal + "just words\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/dir/x.cfg"), ConfigError);
}

TEST_CASE("hyperparameter advisories") {
  fedcore::HyperParams h;
  CHECK(fedcore::advisories(h).empty());
  h.rho = 1e-5;
  CHECK_FALSE(fedcore::advisories(h).empty());
}
