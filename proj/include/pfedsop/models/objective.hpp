#pragma once

#include <cstddef>
#include <memory>

#include "pfedsop/models/batch.hpp"
#include "pfedsop/models/classifier.hpp"
#include "pfedsop/numkit/rng.hpp"
#include "pfedsop/numkit/vector.hpp"

namespace pfedsop::models {

/// Local objective seen by the federated loop: something with a parameter
/// vector, a mini-batch loss/gradient, and an evaluation on held-out rows.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::size_t parameter_count() const = 0;
  /// Mean batch loss; `grad` receives its gradient.
  virtual double loss_and_gradient(const ParamVector& params, const Batch& batch,
                                   ParamVector& grad) const = 0;
  virtual Evaluation evaluate(const ParamVector& params, const Batch& data) const = 0;
  virtual ParamVector initial_params(numkit::RngStream& rng) const = 0;
};

class ClassifierObjective final : public Objective {
 public:
  explicit ClassifierObjective(ModelSpec spec);

  const ModelSpec& spec() const noexcept { return spec_; }

  std::size_t parameter_count() const override;
  double loss_and_gradient(const ParamVector& params, const Batch& batch,
                           ParamVector& grad) const override;
  Evaluation evaluate(const ParamVector& params, const Batch& data) const override;
  ParamVector initial_params(numkit::RngStream& rng) const override;

 private:
  ModelSpec spec_;
};

/// P(x) = 0.5 * |x|^2, independent of the data. Used for hand-traceable
/// runs of the federated loop. Accuracy is reported as 0.
class QuadraticObjective final : public Objective {
 public:
  QuadraticObjective(std::size_t dim, double initial_value)
      : dim_(dim), initial_value_(initial_value) {}

  std::size_t parameter_count() const override { return dim_; }
  double loss_and_gradient(const ParamVector& params, const Batch& batch,
                           ParamVector& grad) const override;
  Evaluation evaluate(const ParamVector& params, const Batch& data) const override;
  ParamVector initial_params(numkit::RngStream& rng) const override;

 private:
  std::size_t dim_;
  double initial_value_;
};

}  // namespace pfedsop::models
