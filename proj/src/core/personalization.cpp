#include "pfedsop/core/personalization.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pfedsop/error.hpp"

namespace pfedsop::core {
namespace {

void check_gompertz_args(double theta, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ParameterError("gompertz_weight: lambda must be > 0, got " + std::to_string(lambda));
  }
  if (!(theta >= 0.0 && theta <= std::numbers::pi)) {
    throw ContractError("gompertz_weight: theta " + std::to_string(theta) + " outside [0, pi]");
  }
}

}  // namespace

double gompertz_complement(double theta, double lambda) {
  check_gompertz_args(theta, lambda);
  return std::exp(-std::exp(-lambda * (theta - 1.0)));
}

double gompertz_weight(double theta, double lambda) {
  return 1.0 - gompertz_complement(theta, lambda);
}

ParamVector personalized_update(const ParamVector& delta_local, const ParamVector& delta_global,
                                double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw ParameterError("personalized_update: beta must be in [0, 1]");
  }
  ParamVector out = numkit::scale(delta_local, 1.0 - beta);
  if (delta_global.size() != delta_local.size()) {
    throw DimensionError("personalized_update: local/global length mismatch");
  }
  numkit::axpy(beta, delta_global, out);
  return out;
}

ParamVector fim_step(const ParamVector& delta_p, double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw ParameterError("fim_step: rho must be > 0, got " + std::to_string(rho));
  }
  // With B = rho I and u = v = dp the Sherman-Morrison inverse applied to dp
  // is dp/rho - dp s / (rho^2 + rho s), s = dp.dp. Both terms are multiples
  // of dp, and their coefficients combine to 1/(rho + s); evaluating the
  // difference literally would cancel about log10(1 + s/rho) digits.
  const double s = numkit::squared_norm(delta_p);
  return numkit::scale(delta_p, 1.0 / (rho + s));
}

PersonalizedModel personalize_model(const ParamVector& x_prev, const ParamVector& delta_local_prev,
                                    const ParamVector& delta_global_prev,
                                    const fedcore::HyperParams& h) {
  if (x_prev.size() != delta_local_prev.size()) {
    throw DimensionError("personalize_model: model/update length mismatch");
  }
  if (!(h.eta1 > 0.0)) throw ParameterError("personalize_model: eta1 must be > 0");

  PersonalizedModel out;
  auto& r = out.report;
  r.sim = numkit::cosine_similarity(delta_local_prev, delta_global_prev);
  r.theta = numkit::angle_from_similarity(r.sim);
  const double keep_local = gompertz_complement(r.theta, h.lambda);
  r.beta = 1.0 - keep_local;

  ParamVector blended = numkit::scale(delta_local_prev, keep_local);
  numkit::axpy(r.beta, delta_global_prev, blended);

  const ParamVector step = fim_step(blended, h.rho);
  r.step_norm = numkit::l2_norm(step);

  out.x = x_prev;
  numkit::axpy(-h.eta1, step, out.x);
  return out;
}

}  // namespace pfedsop::core
