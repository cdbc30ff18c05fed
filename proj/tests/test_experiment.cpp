#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "doctest.h"
#include "pfedsop/cli/config.hpp"
#include "pfedsop/cli/experiment.hpp"
#include "pfedsop/cli/verify.hpp"
#include "pfedsop/error.hpp"

using namespace pfedsop;
using namespace pfedsop::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("pfedsop_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string small_config(const fs::path& out, const std::string& method = "pfedsop") {
  return "method = " + method +
         "\n"
         "dataset = synthetic\n"
         "dataset.num_classes = 4\n"
         "dataset.input_dim = 6\n"
         "dataset.samples_per_class = 40\n"
         "partition = pathological\n"
         "clients = 8\n"
         "participation_fraction = 0.5\n"
         "rounds = 5\n"
         "model.hidden_dim = 8\n"
         "batch_size = 10\n"
         "output_dir = " +
         out.string() + "\n";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t line_count(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string binary() { return PFEDSOP_CLI_PATH; }

}  // namespace

TEST_CASE("prepared experiment shapes") {
  const auto c = parse_config(small_config(scratch("prep")));
  const auto prep = prepare_experiment(c);
  CHECK(prep.dataset.size() == 160);
  CHECK(prep.partition.client_count() == 8);
  // Auto shard size: 160 / (8 * 2) = 10 samples per shard.
  for (const auto& list : prep.partition.assignments) CHECK(list.size() == 20);
  for (const auto& cs : prep.split.clients) {
    CHECK(cs.train.size() == 16);
    CHECK(cs.test.size() == 4);
  }
  CHECK(prep.model.num_classes == 4);
  CHECK(prep.federation.client_count() == 8);
}

TEST_CASE("run writes four files") {
  const auto dir = scratch("run");
  const auto c = parse_config(small_config(dir));
  run(c);
  for (auto f : {kMetricsFile, kSummaryFile, kBestFile, kResolvedConfigFile}) {
    CHECK(fs::exists(dir / f));
  }
  CHECK(line_count(slurp(dir / kSummaryFile)) == 1 + 5);
  CHECK(line_count(slurp(dir / kMetricsFile)) == 1 + 5 * 4);
  CHECK(parse_config(slurp(dir / kResolvedConfigFile)) == c);
  for (const auto& e : fs::directory_iterator(dir)) {
    CHECK(e.path().extension() != ".tmp");
  }
  fs::remove_all(dir);
}

TEST_CASE("unwritable output leaves no partial results") {
  const auto base = scratch("unwritable");
  fs::create_directories(base);
  {
    std::ofstream(base / "plain_file") << "x";
  }
  const auto c = parse_config(small_config(base / "plain_file" / "out"));
  CHECK_THROWS_AS(run(c), Error);

  // Rename of the third file fails: nothing from this run may remain.
  const auto dir = base / "blocked";
  fs::create_directories(dir / kBestFile / "occupied");
  const auto artifacts = run_in_memory(parse_config(small_config(dir)));
  CHECK_THROWS_AS(write_artifacts(dir, artifacts), Error);
  std::set<std::string> left;
  for (const auto& e : fs::directory_iterator(dir)) left.insert(e.path().filename().string());
  CHECK(left == std::set<std::string>{kBestFile});
  fs::remove_all(base);
}

TEST_CASE("reruns and thread counts give identical bytes") {
  for (auto method : {"pfedsop", "pfedsop_no_pc", "fedavg_ft"}) {
    const auto c = parse_config(small_config(scratch("det"), method));
    const auto a = run_in_memory(c, {1});
    const auto b = run_in_memory(c, {1});
    const auto d = run_in_memory(c, {8});
    CHECK(a.metrics_csv == b.metrics_csv);
    CHECK(a.metrics_csv == d.metrics_csv);
    CHECK(a.summary_csv == d.summary_csv);
    CHECK(a.best_csv == d.best_csv);
  }
}

TEST_CASE("cli run, exit codes and env overrides") {
  const auto dir = scratch("cli");
  fs::create_directories(dir);
  const auto cfg = dir / "exp.cfg";
  std::ofstream(cfg) << small_config(dir / "a");
  CHECK(shell(binary() + " run " + cfg.string() + " --threads 1 > /dev/null") == 0);
  CHECK(shell(binary() + " run " + cfg.string() + " --threads 8 > /dev/null") == 0);
  CHECK(shell("PFEDSOP_CFG_OUTPUT_DIR=" + (dir / "b").string() + " " + binary() + " run " +
              cfg.string() + " --threads 0 > /dev/null") == 0);
  CHECK(shell("PFEDSOP_CFG_OUTPUT_DIR=" + (dir / "c").string() + " PFEDSOP_SIMD=scalar " + binary() +
              " run " + cfg.string() + " > /dev/null") == 0);
  for (auto f : {kMetricsFile, kSummaryFile, kBestFile}) {
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    CHECK(slurp(dir / "a" / f) == slurp(dir / "c" / f));
  }

  CHECK(shell("PFEDSOP_CFG_RHO=-1 " + binary() + " run " + cfg.string() + " 2> /dev/null") == 2);
  CHECK(shell(binary() + " run " + (dir / "missing.cfg").string() + " 2> /dev/null") == 2);
  CHECK(shell(binary() + " > /dev/null 2>&1") != 0);
  fs::remove_all(dir);
}

TEST_CASE("shipped configs parse") {
  for (const auto& e : fs::directory_iterator(PFEDSOP_CONFIG_DIR)) {
    if (e.path().extension() != ".cfg") continue;
    CAPTURE(e.path().string());
    CHECK_NOTHROW(load_config(e.path()));
  }
}

TEST_CASE("verify suites pass and catch injected faults") {
  for (const auto& r : run_verify_suites(VerifyTargets::library())) {
    CAPTURE(r.name);
    CAPTURE(r.detail);
    CHECK(r.passed);
  }
  CHECK_FALSE(sherman_morrison_suite(with_fault(Fault::kFimSignFlip)).passed);
  CHECK_FALSE(finite_difference_suite(with_fault(Fault::kGradientBlockZeroed)).passed);
  // Each fault is caught by its own suite only.
  CHECK(finite_difference_suite(with_fault(Fault::kFimSignFlip)).passed);
  CHECK(sherman_morrison_suite(with_fault(Fault::kGradientBlockZeroed)).passed);

  CHECK(shell(binary() + " verify > /dev/null") == 0);
  CHECK(shell(binary() + " verify --inject fim-sign-flip > /dev/null") == 1);
  CHECK(shell(binary() + " verify --inject gradient-block-zeroed > /dev/null") == 1);
}

TEST_CASE("dense solve and difference helpers") {
  const auto x = dense_solve({2, 1, 1, 3}, {3, 5});
  CHECK(x[0] == doctest::Approx(0.8));
  CHECK(x[1] == doctest::Approx(1.4));
  CHECK_THROWS_AS(dense_solve({1, 2, 2, 4}, {1, 1}), DataError);
  const auto f = [](const ParamVector& p) { return p[0] * p[0] * p[0]; };
  CHECK(central_difference(f, ParamVector{2.0}, 0, 1e-5) == doctest::Approx(12.0).epsilon(1e-8));
  CHECK(gradient_relative_error(1e-9, 0.0) == doctest::Approx(1e-3));
}
