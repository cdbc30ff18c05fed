// pfedsop: experiment runner and oracle verification.
//
//   pfedsop run <config> [--threads N]
//   pfedsop verify [--inject fim-sign-flip|gradient-block-zeroed]

#include <cstdio>
#include <exception>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "pfedsop/cli/config.hpp"
#include "pfedsop/cli/experiment.hpp"
#include "pfedsop/cli/verify.hpp"
#include "pfedsop/error.hpp"
#include "pfedsop/numkit/simd.hpp"

namespace {

using namespace pfedsop;

int run_command(const std::string& config_path, std::size_t threads) {
  const auto config = cli::load_config(config_path, cli::process_env);
  for (const auto& note : fedcore::advisories(config.hyper)) {
    std::fprintf(stderr, "warning: %s\n", note.c_str());
  }
  fedcore::RunOptions options;
  options.threads = threads;
  const auto artifacts = cli::run(config, options);
  std::printf("%s: %zu rounds, best-accuracy mean %s, results in %s\n",
              std::string(fedcore::to_string(config.hyper.method)).c_str(),
              artifacts.result.rounds.size(),
              metrics::format_fixed(artifacts.result.best.overall()).c_str(),
              config.output_dir.c_str());
  return 0;
}

int verify_command(cli::Fault fault) {
  const auto results = cli::run_verify_suites(cli::with_fault(fault));
  bool all = true;
  for (const auto& r : results) {
    std::printf("[%s] %s: %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    all = all && r.passed;
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Personalized federated learning simulator (pFedSOP and baselines)"};
  app.require_subcommand(1);

  std::string simd = "auto";
  app.add_option("--simd", simd, "Kernel path: auto, scalar or avx2")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));

  auto* run = app.add_subcommand("run", "Run an experiment from a config file");
  std::string config_path;
  std::size_t threads = 0;
  run->add_option("config", config_path, "Path to the key=value config")->required();
  run->add_option("--threads", threads, "Worker threads per round (0 = auto)");

  auto* verify = app.add_subcommand("verify", "Run the oracle suites");
  cli::Fault fault = cli::Fault::kNone;
  const std::map<std::string, cli::Fault> faults{
      {"none", cli::Fault::kNone},
      {"fim-sign-flip", cli::Fault::kFimSignFlip},
      {"gradient-block-zeroed", cli::Fault::kGradientBlockZeroed},
  };
  verify->add_option("--inject", fault, "Mutate an implementation to smoke-test the suites")
      ->transform(CLI::CheckedTransformer(faults, CLI::ignore_case));

  CLI11_PARSE(app, argc, argv);

  try {
    if (simd == "scalar") numkit::set_simd_level(numkit::SimdLevel::kScalar);
    if (simd == "avx2") numkit::set_simd_level(numkit::SimdLevel::kAvx2);
    if (*run) return run_command(config_path, threads);
    if (*verify) return verify_command(fault);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
