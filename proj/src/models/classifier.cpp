#include "pfedsop/models/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pfedsop/error.hpp"

namespace pfedsop::models {
namespace {

// Offsets of each block inside the flat parameter vector.
struct Layout {
  std::size_t in = 0, hidden = 0, out = 0;
  std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0, total = 0;
  bool has_hidden = false;

  explicit Layout(const ModelSpec& spec)
      : in(spec.input_dim),
        hidden(spec.hidden_dim),
        out(spec.num_classes),
        has_hidden(spec.kind == ModelKind::kMlp) {
    if (has_hidden) {
      w1 = 0;
      b1 = w1 + hidden * in;
      w2 = b1 + hidden;
      b2 = w2 + out * hidden;
      total = b2 + out;
    } else {
      w2 = 0;  // the single layer lives in the "output" slots
      b2 = out * in;
      total = b2 + out;
    }
  }
  std::size_t output_fan_in() const { return has_hidden ? hidden : in; }
};

void check_params(const Layout& layout, const ParamVector& params) {
  if (params.size() != layout.total) {
    throw DimensionError("parameter vector has length " + std::to_string(params.size()) +
                         ", model expects " + std::to_string(layout.total));
  }
}

void check_batch(const ModelSpec& spec, const Batch& batch) {
  if (batch.inputs.rows != batch.labels.size()) {
    throw DimensionError("batch has " + std::to_string(batch.inputs.rows) + " rows but " +
                         std::to_string(batch.labels.size()) + " labels");
  }
  if (batch.inputs.cols != spec.input_dim) {
    throw DimensionError("batch input width " + std::to_string(batch.inputs.cols) +
                         " != model input_dim " + std::to_string(spec.input_dim));
  }
  for (double v : batch.inputs.data) {
    if (std::isnan(v)) throw DataError("NaN in batch inputs");
  }
  for (int label : batch.labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= spec.num_classes) {
      throw DataError("label " + std::to_string(label) + " outside [0, " +
                      std::to_string(spec.num_classes) + ")");
    }
  }
}

// Per-sample forward pass. `hidden_pre` is only touched for the MLP.
class Forward {
 public:
  Forward(const Layout& layout, const ParamVector& params)
      : layout_(layout), params_(params), hidden_pre_(layout.hidden), hidden_(layout.hidden),
        logits_(layout.out), probs_(layout.out) {}

  void run(std::span<const double> x) {
    const double* p = params_.data();
    std::span<const double> features = x;
    if (layout_.has_hidden) {
      for (std::size_t j = 0; j < layout_.hidden; ++j) {
        std::span<const double> w(p + layout_.w1 + j * layout_.in, layout_.in);
        hidden_pre_[j] = numkit::dot(w, x) + p[layout_.b1 + j];
        hidden_[j] = std::max(hidden_pre_[j], 0.0);
      }
      features = hidden_;
    }
    const std::size_t fan_in = layout_.output_fan_in();
    for (std::size_t c = 0; c < layout_.out; ++c) {
      std::span<const double> w(p + layout_.w2 + c * fan_in, fan_in);
      logits_[c] = numkit::dot(w, features) + p[layout_.b2 + c];
    }
    const double max_logit = *std::max_element(logits_.begin(), logits_.end());
    double total = 0.0;
    for (std::size_t c = 0; c < layout_.out; ++c) {
      probs_[c] = std::exp(logits_[c] - max_logit);
      total += probs_[c];
    }
    for (auto& v : probs_) v /= total;
  }

  double sample_loss(int label) const {
    return -std::log(std::max(probs_[static_cast<std::size_t>(label)], kLogProbFloor));
  }

  const std::vector<double>& probs() const { return probs_; }
  const std::vector<double>& hidden() const { return hidden_; }
  const std::vector<double>& hidden_pre() const { return hidden_pre_; }

 private:
  const Layout& layout_;
  const ParamVector& params_;
  std::vector<double> hidden_pre_;
  std::vector<double> hidden_;
  std::vector<double> logits_;
  std::vector<double> probs_;
};

}  // namespace

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::kMlp ? "mlp" : "logistic_regression";
}

ModelKind model_kind_from_string(std::string_view name) {
  if (name == "mlp") return ModelKind::kMlp;
  if (name == "logistic_regression") return ModelKind::kLogisticRegression;
  throw ParameterError("unknown model kind '" + std::string(name) + "'");
}

void validate(const ModelSpec& spec) {
  if (spec.input_dim == 0) throw ParameterError("model input_dim must be >= 1");
  if (spec.num_classes < 2) throw ParameterError("model num_classes must be >= 2");
  if (spec.kind == ModelKind::kMlp && spec.hidden_dim == 0) {
    throw ParameterError("mlp hidden_dim must be >= 1");
  }
}

std::size_t parameter_count(const ModelSpec& spec) {
  validate(spec);
  return Layout(spec).total;
}

ForwardResult forward_loss(const ModelSpec& spec, const ParamVector& params, const Batch& batch) {
  validate(spec);
  const Layout layout(spec);
  check_params(layout, params);
  check_batch(spec, batch);
  if (batch.size() == 0) throw DataError("forward_loss: empty batch");

  ForwardResult result;
  result.probs = Matrix(batch.size(), spec.num_classes);
  Forward fwd(layout, params);
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    fwd.run(batch.inputs.row(i));
    std::copy(fwd.probs().begin(), fwd.probs().end(), result.probs.row(i).begin());
    total += fwd.sample_loss(batch.labels[i]);
  }
  result.loss = total / static_cast<double>(batch.size());
  return result;
}

double loss_and_gradient(const ModelSpec& spec, const ParamVector& params, const Batch& batch,
                         ParamVector& grad) {
  validate(spec);
  const Layout layout(spec);
  check_params(layout, params);
  check_batch(spec, batch);
  if (batch.size() == 0) throw DataError("gradient: empty batch");

  grad = ParamVector(layout.total);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  const std::size_t fan_in = layout.output_fan_in();
  const double* p = params.data();
  double* g = grad.data();

  Forward fwd(layout, params);
  std::vector<double> d_logits(layout.out);
  std::vector<double> d_hidden(layout.hidden);
  double total = 0.0;

  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto x = batch.inputs.row(i);
    fwd.run(x);
    const int label = batch.labels[i];
    total += fwd.sample_loss(label);

    for (std::size_t c = 0; c < layout.out; ++c) {
      d_logits[c] = (fwd.probs()[c] - (static_cast<int>(c) == label ? 1.0 : 0.0)) * inv_n;
    }
    std::span<const double> features = layout.has_hidden ? std::span<const double>(fwd.hidden()) : x;
    for (std::size_t c = 0; c < layout.out; ++c) {
      numkit::axpy(d_logits[c], features, std::span<double>(g + layout.w2 + c * fan_in, fan_in));
      g[layout.b2 + c] += d_logits[c];
    }
    if (!layout.has_hidden) continue;

    std::fill(d_hidden.begin(), d_hidden.end(), 0.0);
    for (std::size_t c = 0; c < layout.out; ++c) {
      numkit::axpy(d_logits[c], std::span<const double>(p + layout.w2 + c * fan_in, fan_in),
                   std::span<double>(d_hidden));
    }
    for (std::size_t j = 0; j < layout.hidden; ++j) {
      if (fwd.hidden_pre()[j] <= 0.0) continue;  // relu gate
      numkit::axpy(d_hidden[j], x, std::span<double>(g + layout.w1 + j * layout.in, layout.in));
      g[layout.b1 + j] += d_hidden[j];
    }
  }
  return total * inv_n;
}

ParamVector gradient(const ModelSpec& spec, const ParamVector& params, const Batch& batch) {
  ParamVector grad;
  loss_and_gradient(spec, params, batch, grad);
  return grad;
}

Evaluation evaluate(const ModelSpec& spec, const ParamVector& params, const Batch& data) {
  validate(spec);
  const Layout layout(spec);
  check_params(layout, params);
  check_batch(spec, data);
  if (data.size() == 0) throw DataError("evaluate: empty dataset");

  Forward fwd(layout, params);
  std::size_t correct = 0;
  double total_loss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    fwd.run(data.inputs.row(i));
    const auto& probs = fwd.probs();
    std::size_t best = 0;
    for (std::size_t c = 1; c < probs.size(); ++c) {
      if (probs[c] > probs[best]) best = c;
    }
    if (static_cast<int>(best) == data.labels[i]) ++correct;
    total_loss += fwd.sample_loss(data.labels[i]);
  }
  const auto n = static_cast<double>(data.size());
  return {static_cast<double>(correct) / n, total_loss / n};
}

ParamVector initialize_params(const ModelSpec& spec, numkit::RngStream& rng) {
  validate(spec);
  const Layout layout(spec);
  ParamVector params(layout.total);
  auto fill_uniform = [&](std::size_t offset, std::size_t count, std::size_t fan_in,
                          std::size_t fan_out) {
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::size_t i = 0; i < count; ++i) params[offset + i] = rng.uniform(-a, a);
  };
  if (layout.has_hidden) {
    fill_uniform(layout.w1, layout.hidden * layout.in, layout.in, layout.hidden);
  }
  const std::size_t fan_in = layout.output_fan_in();
  fill_uniform(layout.w2, layout.out * fan_in, fan_in, layout.out);
  return params;
}

}  // namespace pfedsop::models
