#include "pfedsop/numkit/vector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pfedsop/error.hpp"
#include "pfedsop/numkit/simd.hpp"

namespace pfedsop::numkit {
namespace {

void require_same_size(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    throw DimensionError(std::string(op) + ": length mismatch (" + std::to_string(a) + " vs " +
                         std::to_string(b) + ")");
  }
}

}  // namespace

ParamVector add(const ParamVector& a, const ParamVector& b) {
  require_same_size(a.size(), b.size(), "add");
  ParamVector out(a.size());
  kernels().add(a.data(), b.data(), out.data(), a.size());
  return out;
}

ParamVector subtract(const ParamVector& a, const ParamVector& b) {
  require_same_size(a.size(), b.size(), "subtract");
  ParamVector out(a.size());
  kernels().sub(a.data(), b.data(), out.data(), a.size());
  return out;
}

ParamVector scale(const ParamVector& a, double s) {
  ParamVector out(a.size());
  kernels().scale(s, a.data(), out.data(), a.size());
  return out;
}

double dot(const ParamVector& a, const ParamVector& b) { return dot(a.span(), b.span()); }

double squared_norm(const ParamVector& a) { return kernels().squared_norm(a.data(), a.size()); }

double l2_norm(const ParamVector& a) { return std::sqrt(squared_norm(a)); }

void axpy(double alpha, const ParamVector& x, ParamVector& y) { axpy(alpha, x.span(), y.span()); }

void scale_in_place(ParamVector& y, double alpha) {
  kernels().scale(alpha, y.data(), y.data(), y.size());
}

bool all_finite(const ParamVector& a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "dot");
  return kernels().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require_same_size(x.size(), y.size(), "axpy");
  kernels().axpy(alpha, x.data(), y.data(), x.size());
}

double cosine_similarity(const ParamVector& a, const ParamVector& b) {
  require_same_size(a.size(), b.size(), "cosine_similarity");
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na <= kVanishingNorm || nb <= kVanishingNorm) return 0.0;
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

double angle_from_similarity(double sim) {
  constexpr double kSlack = 1e-12;
  if (std::isnan(sim) || sim > 1.0 + kSlack || sim < -1.0 - kSlack) {
    throw ContractError("angle_from_similarity: similarity " + std::to_string(sim) +
                        " outside [-1, 1]");
  }
  return std::acos(std::clamp(sim, -1.0, 1.0));
}

}  // namespace pfedsop::numkit
