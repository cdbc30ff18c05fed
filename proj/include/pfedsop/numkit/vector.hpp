#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace pfedsop::numkit {

/// Flat real vector holding every parameter of a model (or a gradient /
/// gradient update with the same layout). Length never changes through the
/// arithmetic helpers below; binary helpers throw DimensionError on mismatch.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::size_t size, double fill = 0.0) : values_(size, fill) {}
  ParamVector(std::initializer_list<double> init) : values_(init) {}
  explicit ParamVector(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }

  std::span<double> span() noexcept { return values_; }
  std::span<const double> span() const noexcept { return values_; }

  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  const std::vector<double>& values() const noexcept { return values_; }

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<double> values_;
};

ParamVector add(const ParamVector& a, const ParamVector& b);
ParamVector subtract(const ParamVector& a, const ParamVector& b);
ParamVector scale(const ParamVector& a, double s);
double dot(const ParamVector& a, const ParamVector& b);
double squared_norm(const ParamVector& a);
double l2_norm(const ParamVector& a);

/// y += alpha * x
void axpy(double alpha, const ParamVector& x, ParamVector& y);
/// y *= alpha
void scale_in_place(ParamVector& y, double alpha);

bool all_finite(const ParamVector& a);

/// Span-level forms used by the model code.
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// Norms at or below this are treated as a vanishing vector.
inline constexpr double kVanishingNorm = 1e-12;

/// dot(a,b)/(|a||b|) clamped to [-1,1]; 0 if either norm is vanishing.
double cosine_similarity(const ParamVector& a, const ParamVector& b);

/// arccos(sim) in radians. Inputs within 1e-12 outside [-1,1] are clamped;
/// anything further out (or NaN) raises ContractError.
double angle_from_similarity(double sim);

}  // namespace pfedsop::numkit
