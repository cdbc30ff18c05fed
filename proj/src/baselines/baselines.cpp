#include "pfedsop/baselines/baselines.hpp"

#include "pfedsop/error.hpp"

namespace pfedsop::baselines {

using fedcore::Method;

bool is_global_method(Method method) {
  return method == Method::kFedAvg || method == Method::kFedProx || method == Method::kFedAvgFt ||
         method == Method::kFedProxFt;
}

bool is_fine_tuned(Method method) {
  return method == Method::kFedAvgFt || method == Method::kFedProxFt;
}

bool is_proximal(Method method) {
  return method == Method::kFedProx || method == Method::kFedProxFt;
}

ParamVector fedprox_gradient(const models::ModelSpec& spec, const ParamVector& params,
                             const Batch& batch, const ParamVector& anchor, double mu) {
  if (!(mu >= 0.0)) throw ParameterError("fedprox_gradient: mu must be >= 0");
  if (anchor.size() != params.size()) throw DimensionError("fedprox_gradient: anchor length");
  ParamVector grad = models::gradient(spec, params, batch);
  if (mu == 0.0) return grad;
  numkit::axpy(mu, numkit::subtract(params, anchor), grad);
  return grad;
}

fedcore::GradientFn proximal_gradient_fn(const models::Objective& objective,
                                         const ParamVector& anchor, double mu) {
  if (!(mu >= 0.0)) throw ParameterError("proximal term: mu must be >= 0");
  if (anchor.size() != objective.parameter_count()) {
    throw DimensionError("proximal term: anchor length");
  }
  return [&objective, anchor, mu](const ParamVector& p, const Batch& b, ParamVector& g) {
    const double loss = objective.loss_and_gradient(p, b, g);
    if (mu != 0.0) numkit::axpy(mu, numkit::subtract(p, anchor), g);
    return loss;
  };
}

LocalUpdate fedavg_client_step(const models::Objective& objective, const ParamVector& x_global,
                               const Batch& train, const HyperParams& h, numkit::RngStream& rng) {
  const double mu = is_proximal(h.method) ? h.mu : 0.0;
  const auto fn = proximal_gradient_fn(objective, x_global, mu);
  return fedcore::run_local_sgd(fn, x_global, train, h.eta2, h.local_epochs, h.batch_size, rng);
}

ParamVector fedavg_server_update(const ParamVector& x_global, const ParamVector& mean_delta,
                                 double eta2) {
  ParamVector next = x_global;
  numkit::axpy(-eta2, mean_delta, next);
  return next;
}

models::Evaluation fine_tune_then_eval(const models::Objective& objective,
                                       const ParamVector& x_global, const ClientData& data,
                                       std::size_t ft_epochs, const HyperParams& h,
                                       numkit::RngStream& rng) {
  if (ft_epochs == 0) return objective.evaluate(x_global, data.test);
  const auto update = fedcore::local_gradient_update(
      objective, x_global, data.train,
      [&] {
        HyperParams ft = h;
        ft.local_epochs = ft_epochs;
        return ft;
      }(),
      rng);
  return objective.evaluate(update.x_final, data.test);
}

}  // namespace pfedsop::baselines
