#include "pfedsop/cli/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "pfedsop/core/personalization.hpp"
#include "pfedsop/error.hpp"
#include "pfedsop/fedcore/federation.hpp"
#include "pfedsop/numkit/rng.hpp"

namespace pfedsop::cli {
namespace {

using models::Batch;
using models::ModelKind;
using models::ModelSpec;
using numkit::RngStream;
using numkit::StreamDomain;

constexpr std::uint64_t kVerifySeed = 20240917;

std::string format(const char* fmt, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  return buf;
}

Batch random_batch(const ModelSpec& spec, std::size_t n, RngStream& rng) {
  Batch b;
  b.inputs = models::Matrix(n, spec.input_dim);
  for (auto& v : b.inputs.data) v = rng.normal();
  b.labels.resize(n);
  for (auto& l : b.labels) l = static_cast<int>(rng.index(spec.num_classes));
  return b;
}

ModelSpec random_spec(RngStream& rng, bool mlp) {
  ModelSpec spec;
  spec.kind = mlp ? ModelKind::kMlp : ModelKind::kLogisticRegression;
  spec.input_dim = 2 + rng.index(7);
  spec.hidden_dim = mlp ? 3 + rng.index(8) : 0;
  spec.num_classes = 2 + rng.index(4);
  return spec;
}

ParamVector random_params(const ModelSpec& spec, RngStream& rng) {
  ParamVector p = models::initialize_params(spec, rng);
  for (auto& v : p) v += 0.3 * rng.normal();  // nonzero biases, off-init weights
  return p;
}

}  // namespace

std::vector<double> dense_solve(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  if (a.size() != n * n) throw DimensionError("dense_solve: matrix is not n x n");
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    }
    if (a[pivot * n + col] == 0.0) throw DataError("dense_solve: singular matrix");
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a[r * n + col] / a[col * n + col];
      if (factor == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= factor * a[col * n + c];
      b[r] -= factor * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= a[i * n + c] * x[c];
    x[i] = acc / a[i * n + i];
  }
  return x;
}

double central_difference(const std::function<double(const ParamVector&)>& f,
                          const ParamVector& x, std::size_t coordinate, double h) {
  ParamVector plus = x;
  ParamVector minus = x;
  plus[coordinate] += h;
  minus[coordinate] -= h;
  return (f(plus) - f(minus)) / (2.0 * h);
}

double gradient_relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / scale;
}

VerifyTargets VerifyTargets::library() {
  VerifyTargets t;
  t.fim_step = [](const ParamVector& d, double rho) { return core::fim_step(d, rho); };
  t.gradient = [](const ModelSpec& s, const ParamVector& p, const Batch& b) {
    return models::gradient(s, p, b);
  };
  return t;
}

VerifyTargets with_fault(Fault fault) {
  VerifyTargets t = VerifyTargets::library();
  switch (fault) {
    case Fault::kNone:
      break;
    case Fault::kFimSignFlip:
      t.fim_step = [](const ParamVector& d, double rho) {
        return numkit::scale(core::fim_step(d, rho), -1.0);
      };
      break;
    case Fault::kGradientBlockZeroed:
      t.gradient = [](const ModelSpec& s, const ParamVector& p, const Batch& b) {
        ParamVector g = models::gradient(s, p, b);
        const std::size_t first_block =
            s.kind == ModelKind::kMlp ? s.hidden_dim * s.input_dim : s.num_classes * s.input_dim;
        std::fill(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(first_block), 0.0);
        return g;
      };
      break;
  }
  return t;
}

SuiteResult sherman_morrison_suite(const VerifyTargets& t, std::size_t cases) {
  RngStream rng(kVerifySeed, {StreamDomain::kTest, 1, 0});
  double worst = 0.0;
  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t d = 1 + rng.index(50);
    const double rho = std::pow(10.0, rng.uniform(-2.0, 1.0));
    const double magnitude = std::pow(10.0, rng.uniform(-1.0, 0.5));
    ParamVector delta(d);
    for (auto& v : delta) v = magnitude * rng.normal();

    std::vector<double> a(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) a[i * d + j] = delta[i] * delta[j];
      a[i * d + i] += rho;
    }
    const auto expected = dense_solve(std::move(a), delta.values());
    const auto got = t.fim_step(delta, rho);
    for (std::size_t i = 0; i < d; ++i) worst = std::max(worst, std::abs(got[i] - expected[i]));
  }
  return {"sherman_morrison", worst <= 1e-8,
          format("max |closed form - dense solve| = %.3e over %g cases (tol 1e-8)", worst,
                 static_cast<double>(cases))};
}

SuiteResult finite_difference_suite(const VerifyTargets& t, std::size_t instances) {
  RngStream rng(kVerifySeed, {StreamDomain::kTest, 2, 0});
  double worst = 0.0;
  for (std::size_t inst = 0; inst < instances; ++inst) {
    const ModelSpec spec = random_spec(rng, inst % 2 == 0);
    const ParamVector params = random_params(spec, rng);
    const Batch batch = random_batch(spec, 4 + rng.index(8), rng);
    const ParamVector analytic = t.gradient(spec, params, batch);
    const auto loss = [&](const ParamVector& p) { return models::forward_loss(spec, p, batch).loss; };

    const std::size_t samples = std::min<std::size_t>(50, params.size());
    for (std::size_t s = 0; s < samples; ++s) {
      const std::size_t coord = samples == params.size() ? s : rng.index(params.size());
      const double numeric = central_difference(loss, params, coord, 1e-5);
      worst = std::max(worst, gradient_relative_error(analytic[coord], numeric));
    }
  }
  return {"finite_difference", worst <= 1e-4,
          format("max sampled relative error = %.3e over %g instances (tol 1e-4)", worst,
                 static_cast<double>(instances))};
}

SuiteResult delta_sum_suite(const VerifyTargets& t, std::size_t instances) {
  RngStream rng(kVerifySeed, {StreamDomain::kTest, 3, 0});
  double worst = 0.0;
  std::size_t longest = 0;
  for (std::size_t inst = 0; inst < instances; ++inst) {
    const ModelSpec spec = random_spec(rng, true);
    const ParamVector x0 = random_params(spec, rng);
    const std::size_t n = 5 + rng.index(36);
    const Batch train = random_batch(spec, n, rng);
    std::size_t batch_size = 1 + rng.index(8);
    std::size_t epochs = 1 + rng.index(2);
    while (epochs * ((n + batch_size - 1) / batch_size) > 20) {
      if (epochs > 1) {
        --epochs;
      } else {
        ++batch_size;
      }
    }
    const double eta2 = std::pow(10.0, rng.uniform(-2.0, -0.5));

    const fedcore::GradientFn fn = [&](const ParamVector& p, const Batch& b, ParamVector& g) {
      g = t.gradient(spec, p, b);
      return 0.0;
    };
    ParamVector grad_sum(x0.size());
    const auto observer = [&](std::size_t, const ParamVector& g) {
      for (std::size_t i = 0; i < g.size(); ++i) grad_sum[i] += g[i];
    };
    RngStream sgd_rng(kVerifySeed, {StreamDomain::kClientSgd, inst, 0});
    const auto update =
        fedcore::run_local_sgd(fn, x0, train, eta2, epochs, batch_size, sgd_rng, observer);
    longest = std::max(longest, update.steps);

    double diff = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < x0.size(); ++i) {
      diff = std::max(diff, std::abs(update.delta[i] - grad_sum[i]));
      scale = std::max(scale, std::abs(grad_sum[i]));
    }
    worst = std::max(worst, scale > 0.0 ? diff / scale : diff);
  }
  return {"delta_sum", worst <= 5e-7,
          format("max relative |(x0 - xT)/eta2 - sum g| = %.3e, longest probe %g steps (tol 5e-7)",
                 worst, static_cast<double>(longest))};
}

SuiteResult gompertz_suite() {
  bool ok = true;
  double worst_fixed = 0.0;
  const double fixed = 1.0 - std::exp(-1.0);
  for (double lambda : {0.5, 1.0, 2.5, 5.0}) {
    worst_fixed = std::max(worst_fixed, std::abs(core::gompertz_weight(1.0, lambda) - fixed));
    double prev_complement = -1.0;
    double prev_beta = 2.0;
    for (int k = 0; k < 1000; ++k) {
      const double theta = std::numbers::pi * k / 999.0;
      const double c = core::gompertz_complement(theta, lambda);
      const double beta = core::gompertz_weight(theta, lambda);
      if (!(c > prev_complement) || beta > prev_beta) ok = false;
      prev_complement = c;
      prev_beta = beta;
    }
  }
  ok = ok && worst_fixed <= 1e-12;
  return {"gompertz", ok,
          format("max |beta(1, lambda) - (1 - 1/e)| = %.3e; grid monotone: ", worst_fixed) +
              (ok ? "yes" : "no")};
}

std::vector<SuiteResult> run_verify_suites(const VerifyTargets& targets) {
  return {sherman_morrison_suite(targets), finite_difference_suite(targets),
          delta_sum_suite(targets), gompertz_suite()};
}

}  // namespace pfedsop::cli
