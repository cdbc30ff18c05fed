#include "pfedsop/fedcore/hyperparams.hpp"

#include <cmath>
#include <string>

#include "pfedsop/error.hpp"

namespace pfedsop::fedcore {
namespace {

struct MethodName {
  Method method;
  std::string_view name;
};

constexpr MethodName kMethodNames[] = {
    {Method::kPfedsop, "pfedsop"},   {Method::kPfedsopNoPc, "pfedsop_no_pc"},
    {Method::kFedAvg, "fedavg"},     {Method::kFedProx, "fedprox"},
    {Method::kFedAvgFt, "fedavg_ft"}, {Method::kFedProxFt, "fedprox_ft"},
};

void require(bool ok, const char* key, const std::string& what) {
  if (!ok) throw ConfigError(key, what);
}

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

}  // namespace

std::string_view to_string(Method method) {
  for (const auto& entry : kMethodNames) {
    if (entry.method == method) return entry.name;
  }
  return "unknown";
}

Method method_from_string(std::string_view name) {
  for (const auto& entry : kMethodNames) {
    if (entry.name == name) return entry.method;
  }
  throw ConfigError("method", "unknown method '" + std::string(name) + "'");
}

std::string_view to_string(EvalPoint point) {
  return point == EvalPoint::kPersonalized ? "personalized" : "post_sgd";
}

EvalPoint eval_point_from_string(std::string_view name) {
  if (name == "personalized") return EvalPoint::kPersonalized;
  if (name == "post_sgd") return EvalPoint::kPostSgd;
  throw ConfigError("eval_point", "expected 'personalized' or 'post_sgd', got '" +
                                      std::string(name) + "'");
}

void validate(const HyperParams& h) {
  require(positive(h.eta1), "eta1", "must be > 0");
  require(positive(h.eta2), "eta2", "must be > 0");
  require(positive(h.rho), "rho", "must be > 0");
  require(positive(h.lambda), "lambda", "must be > 0");
  require(h.mu >= 0.0 && std::isfinite(h.mu), "mu", "must be >= 0");
  require(h.local_epochs >= 1, "local_epochs", "must be >= 1");
  require(h.batch_size >= 1, "batch_size", "must be >= 1");
  require(h.participation_fraction > 0.0 && h.participation_fraction <= 1.0,
          "participation_fraction", "must be in (0, 1]");
}

std::vector<std::string> advisories(const HyperParams& h) {
  std::vector<std::string> notes;
  const double ratio = h.rho / h.eta1;
  if (ratio < 1e-3 || ratio > 1e3) {
    notes.push_back("rho/eta1 = " + std::to_string(ratio) +
                    " is outside [1e-3, 1e3]; the personalization step may be unstable");
  }
  return notes;
}

}  // namespace pfedsop::fedcore
