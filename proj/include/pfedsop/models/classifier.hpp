#pragma once

// Softmax classifiers over a flat parameter vector.
//
// Flat layout (fixed):
//   logistic regression:  W (num_classes x input_dim, row-major), b (num_classes)
//   mlp:                  W1 (hidden x input_dim), b1 (hidden),
//                         W2 (num_classes x hidden), b2 (num_classes)
// The hidden layer uses ReLU.

#include <cstddef>
#include <string_view>

#include "pfedsop/models/batch.hpp"
#include "pfedsop/numkit/rng.hpp"
#include "pfedsop/numkit/vector.hpp"

namespace pfedsop::models {

using numkit::ParamVector;

enum class ModelKind { kLogisticRegression, kMlp };

std::string_view to_string(ModelKind kind);
/// Throws ParameterError for unknown names.
ModelKind model_kind_from_string(std::string_view name);

struct ModelSpec {
  ModelKind kind = ModelKind::kLogisticRegression;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;  // ignored for logistic regression
  std::size_t num_classes = 2;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

void validate(const ModelSpec& spec);
std::size_t parameter_count(const ModelSpec& spec);

/// Smallest probability fed to log() in the cross-entropy.
inline constexpr double kLogProbFloor = 1e-12;

struct ForwardResult {
  double loss = 0.0;  // mean cross-entropy over the batch
  Matrix probs;       // batch_size x num_classes
};

ForwardResult forward_loss(const ModelSpec& spec, const ParamVector& params, const Batch& batch);

/// Analytic gradient of forward_loss().loss with respect to params.
ParamVector gradient(const ModelSpec& spec, const ParamVector& params, const Batch& batch);

/// Fused form: writes the gradient into `grad` (resized as needed) and
/// returns the mean loss. Same numbers as the two calls above.
double loss_and_gradient(const ModelSpec& spec, const ParamVector& params, const Batch& batch,
                         ParamVector& grad);

struct Evaluation {
  double accuracy = 0.0;
  double mean_loss = 0.0;
};

/// Argmax accuracy (ties go to the lowest class index) and mean loss.
/// Throws DataError on an empty dataset.
Evaluation evaluate(const ModelSpec& spec, const ParamVector& params, const Batch& data);

/// Weights ~ U(-a, a), a = sqrt(6 / (fan_in + fan_out)); biases zero.
ParamVector initialize_params(const ModelSpec& spec, numkit::RngStream& rng);

}  // namespace pfedsop::models
