#include <atomic>
#include <cstdlib>
#include <string>

#include "pfedsop/error.hpp"
#include "pfedsop/numkit/simd.hpp"

namespace pfedsop::numkit {
namespace {

bool cpu_has_avx2() {
#if defined(PFEDSOP_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

SimdLevel initial_level() {
  SimdLevel level = detected_simd_level();
  if (const char* env = std::getenv("PFEDSOP_SIMD")) {
    const std::string requested = env;
    if (requested == "scalar") {
      level = SimdLevel::kScalar;
    } else if (requested == "avx2" && simd_level_supported(SimdLevel::kAvx2)) {
      level = SimdLevel::kAvx2;
    }
  }
  return level;
}

std::atomic<const KernelTable*>& active_table() {
  static std::atomic<const KernelTable*> table{&kernel_table(initial_level())};
  return table;
}

}  // namespace

std::string_view to_string(SimdLevel level) {
  switch (level) {
    case SimdLevel::kScalar:
      return "scalar";
    case SimdLevel::kAvx2:
      return "avx2";
  }
  return "unknown";
}

SimdLevel detected_simd_level() {
  static const SimdLevel level = cpu_has_avx2() ? SimdLevel::kAvx2 : SimdLevel::kScalar;
  return level;
}

bool simd_level_supported(SimdLevel level) {
  return level == SimdLevel::kScalar || detected_simd_level() == SimdLevel::kAvx2;
}

const KernelTable& kernel_table(SimdLevel level) {
#if defined(PFEDSOP_HAVE_AVX2)
  if (level == SimdLevel::kAvx2) return avx2::kTable;
#endif
  (void)level;
  return scalar::kTable;
}

SimdLevel active_simd_level() {
#if defined(PFEDSOP_HAVE_AVX2)
  if (active_table().load(std::memory_order_relaxed) == &avx2::kTable) return SimdLevel::kAvx2;
#endif
  return SimdLevel::kScalar;
}

void set_simd_level(SimdLevel level) {
  if (!simd_level_supported(level)) {
    throw ParameterError("SIMD level " + std::string(to_string(level)) +
                         " is not supported on this CPU/build");
  }
  active_table().store(&kernel_table(level), std::memory_order_relaxed);
}

const KernelTable& kernels() { return *active_table().load(std::memory_order_relaxed); }

}  // namespace pfedsop::numkit
