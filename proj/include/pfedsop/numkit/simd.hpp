#pragma once

// Flat double-precision kernels with a scalar reference path and an AVX2
// path. The active path is chosen once at startup from CPUID and can be
// pinned with PFEDSOP_SIMD=scalar|avx2 or set_simd_level().
//
// Elementwise kernels are bit-identical across paths (no FMA contraction).
// Reductions differ only by summation order.

#include <cstddef>
#include <string_view>

namespace pfedsop::numkit {

enum class SimdLevel { kScalar, kAvx2 };

std::string_view to_string(SimdLevel level);

/// Best level the running CPU and this build support.
SimdLevel detected_simd_level();
bool simd_level_supported(SimdLevel level);

/// Level used by the dispatched kernels below.
SimdLevel active_simd_level();
/// Throws ParameterError when `level` is not supported here.
void set_simd_level(SimdLevel level);

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*squared_norm)(const double* a, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out[i] = alpha * x[i]
  void (*scale)(double alpha, const double* x, double* out, std::size_t n);
  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  void (*sub)(const double* a, const double* b, double* out, std::size_t n);
};

/// Kernel table for a specific level; used by the equivalence tests.
const KernelTable& kernel_table(SimdLevel level);
/// Kernel table for the active level.
const KernelTable& kernels();

namespace scalar {
extern const KernelTable kTable;
}
#if defined(PFEDSOP_HAVE_AVX2)
namespace avx2 {
extern const KernelTable kTable;
}
#endif

}  // namespace pfedsop::numkit
