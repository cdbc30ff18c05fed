#pragma once

// Independent oracle suites run by `pfedsop verify`.

#include <functional>
#include <string>
#include <vector>

#include "pfedsop/models/classifier.hpp"
#include "pfedsop/numkit/vector.hpp"

namespace pfedsop::cli {

using numkit::ParamVector;

/// Solves A x = b by Gaussian elimination with partial pivoting.
/// `a` is n x n row-major. Throws DataError when A is singular.
std::vector<double> dense_solve(std::vector<double> a, std::vector<double> b);

/// Central difference (f(x + h e_i) - f(x - h e_i)) / 2h.
double central_difference(const std::function<double(const ParamVector&)>& f,
                          const ParamVector& x, std::size_t coordinate, double h);

/// Relative error used by the gradient checks. Magnitudes below 1e-6 are
/// floored so that two near-zero values compare on absolute terms.
double gradient_relative_error(double analytic, double numeric);

/// Implementations under test. Defaults are the library functions; the
/// verify command swaps in mutated versions to prove the suites bite.
struct VerifyTargets {
  std::function<ParamVector(const ParamVector&, double)> fim_step;
  std::function<ParamVector(const models::ModelSpec&, const ParamVector&, const models::Batch&)>
      gradient;

  static VerifyTargets library();
};

enum class Fault { kNone, kFimSignFlip, kGradientBlockZeroed };
VerifyTargets with_fault(Fault fault);

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

SuiteResult sherman_morrison_suite(const VerifyTargets& t, std::size_t cases = 200);
SuiteResult finite_difference_suite(const VerifyTargets& t, std::size_t instances = 20);
SuiteResult delta_sum_suite(const VerifyTargets& t, std::size_t instances = 20);
SuiteResult gompertz_suite();

std::vector<SuiteResult> run_verify_suites(const VerifyTargets& targets);

}  // namespace pfedsop::cli
