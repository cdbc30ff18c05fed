#pragma once

// Personalized second-order model update.
//
// Given a client's latest local gradient update and the latest global one:
//   sim   = cos(local, global)
//   theta = arccos(sim)                        (radians)
//   beta  = 1 - exp(-exp(-lambda (theta - 1)))  (Gompertz)
//   dp    = (1 - beta) local + beta global
//   step  = (dp dp^T + rho I)^{-1} dp           (Sherman-Morrison, matrix-free)
//   x    <- x - eta1 step

#include "pfedsop/fedcore/hyperparams.hpp"
#include "pfedsop/numkit/vector.hpp"

namespace pfedsop::core {

using numkit::ParamVector;

struct PersonalizationReport {
  double sim = 0.0;
  double theta = 0.0;
  double beta = 0.0;
  double step_norm = 0.0;
};

/// Strictly decreasing in theta; equals 1 - 1/e at theta = 1 for every
/// lambda. Throws ParameterError for lambda <= 0 and ContractError for theta
/// outside [0, pi].
double gompertz_weight(double theta, double lambda);

/// 1 - gompertz_weight(theta, lambda), evaluated directly. Keeps full
/// relative precision where beta itself rounds to 1.0 (small theta, large
/// lambda).
double gompertz_complement(double theta, double lambda);

/// (1 - beta) * delta_local + beta * delta_global.
ParamVector personalized_update(const ParamVector& delta_local, const ParamVector& delta_global,
                                double beta);

/// Sherman-Morrison solve of (dp dp^T + rho I) step = dp:
///   step = dp / rho - dp (dp.dp) / (rho^2 + rho dp.dp)
/// No d x d matrix is formed. Throws ParameterError for rho <= 0.
ParamVector fim_step(const ParamVector& delta_p, double rho);

struct PersonalizedModel {
  ParamVector x;
  PersonalizationReport report;
};

/// One full personalization of a returning client. Uses h.eta1, h.rho and
/// h.lambda.
PersonalizedModel personalize_model(const ParamVector& x_prev, const ParamVector& delta_local_prev,
                                    const ParamVector& delta_global_prev,
                                    const fedcore::HyperParams& h);

}  // namespace pfedsop::core
