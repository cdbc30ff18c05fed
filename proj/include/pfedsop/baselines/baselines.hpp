#pragma once

// FedAvg / FedProx and their fine-tuned variants, sharing fedcore's round
// loop. FedAvg is run in gradient-update form: the server applies
// x_global <- x_global - eta2 * mean(delta), which is the same as averaging
// the clients' locally updated models.

#include "pfedsop/fedcore/federation.hpp"
#include "pfedsop/models/classifier.hpp"

namespace pfedsop::baselines {

using fedcore::ClientData;
using fedcore::HyperParams;
using fedcore::LocalUpdate;
using models::Batch;
using numkit::ParamVector;

/// gradient + mu * (params - anchor). Bitwise equal to the plain gradient
/// when mu == 0.
ParamVector fedprox_gradient(const models::ModelSpec& spec, const ParamVector& params,
                             const Batch& batch, const ParamVector& anchor, double mu);

/// Wraps an objective with the FedProx proximal term around a copy of
/// `anchor`. The objective must outlive the returned function.
fedcore::GradientFn proximal_gradient_fn(const models::Objective& objective,
                                         const ParamVector& anchor, double mu);

/// Local SGD from the broadcast global model. Uses the proximal term when
/// h.method is a FedProx variant and h.mu > 0.
LocalUpdate fedavg_client_step(const models::Objective& objective, const ParamVector& x_global,
                               const Batch& train, const HyperParams& h, numkit::RngStream& rng);

/// Server side of FedAvg: x_global - eta2 * mean(deltas).
ParamVector fedavg_server_update(const ParamVector& x_global, const ParamVector& mean_delta,
                                 double eta2);

/// Fine-tunes a copy of x_global for ft_epochs local epochs (plain SGD with
/// h.eta2 and h.batch_size) and evaluates it on the client's test rows. The
/// copy is discarded.
models::Evaluation fine_tune_then_eval(const models::Objective& objective,
                                       const ParamVector& x_global, const ClientData& data,
                                       std::size_t ft_epochs, const HyperParams& h,
                                       numkit::RngStream& rng);

bool is_global_method(fedcore::Method method);
bool is_fine_tuned(fedcore::Method method);
bool is_proximal(fedcore::Method method);

}  // namespace pfedsop::baselines
