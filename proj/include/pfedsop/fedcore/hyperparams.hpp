#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace pfedsop::fedcore {

enum class Method { kPfedsop, kPfedsopNoPc, kFedAvg, kFedProx, kFedAvgFt, kFedProxFt };

std::string_view to_string(Method method);
/// Throws ConfigError("method", ...) for unknown names.
Method method_from_string(std::string_view name);

/// Which model a pFedSOP client is scored with each round.
enum class EvalPoint {
  kPersonalized,  // x_it right after personalization, before the SGD probe
  kPostSgd,       // the SGD probe's endpoint
};

std::string_view to_string(EvalPoint point);
EvalPoint eval_point_from_string(std::string_view name);

struct HyperParams {
  double eta1 = 1.0;   // personalization step size
  double eta2 = 0.05;  // local SGD step size
  double rho = 1.0;    // FIM regularizer
  double lambda = 1.0; // Gompertz steepness
  double mu = 0.0;     // FedProx proximal weight
  std::size_t local_epochs = 1;
  std::size_t batch_size = 50;
  double participation_fraction = 0.2;
  std::size_t rounds = 1;
  std::uint64_t seed = 0;
  Method method = Method::kPfedsop;
  std::size_t ft_epochs = 1;
  EvalPoint eval_point = EvalPoint::kPersonalized;

  friend bool operator==(const HyperParams&, const HyperParams&) = default;
};

/// Throws ConfigError naming the first offending field. `rounds` may be 0.
void validate(const HyperParams& h);

/// Non-fatal advisories, e.g. rho/eta1 far outside [1e-3, 1e3].
std::vector<std::string> advisories(const HyperParams& h);

}  // namespace pfedsop::fedcore
