#include "pfedsop/models/objective.hpp"

#include "pfedsop/error.hpp"

namespace pfedsop::models {

ClassifierObjective::ClassifierObjective(ModelSpec spec) : spec_(spec) { validate(spec_); }

std::size_t ClassifierObjective::parameter_count() const {
  return models::parameter_count(spec_);
}

double ClassifierObjective::loss_and_gradient(const ParamVector& params, const Batch& batch,
                                              ParamVector& grad) const {
  return models::loss_and_gradient(spec_, params, batch, grad);
}

Evaluation ClassifierObjective::evaluate(const ParamVector& params, const Batch& data) const {
  return models::evaluate(spec_, params, data);
}

ParamVector ClassifierObjective::initial_params(numkit::RngStream& rng) const {
  return initialize_params(spec_, rng);
}

double QuadraticObjective::loss_and_gradient(const ParamVector& params, const Batch& /*batch*/,
                                             ParamVector& grad) const {
  if (params.size() != dim_) throw DimensionError("quadratic objective: wrong parameter length");
  grad = params;
  return 0.5 * numkit::squared_norm(params);
}

Evaluation QuadraticObjective::evaluate(const ParamVector& params, const Batch& /*data*/) const {
  return {0.0, 0.5 * numkit::squared_norm(params)};
}

ParamVector QuadraticObjective::initial_params(numkit::RngStream& /*rng*/) const {
  return ParamVector(dim_, initial_value_);
}

}  // namespace pfedsop::models
