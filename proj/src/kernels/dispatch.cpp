#include <cstdlib>
#include <cstring>

#include "fcdram/kernels.hpp"

namespace fcdram::kernels {

#ifdef FCDRAM_BUILD_AVX2
const Table& avx2_table();
#endif

const Table* avx2() {
#if defined(FCDRAM_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const Table& best() {
  static const Table* chosen = [] {
    const char* env = std::getenv("FCDRAM_KERNELS");
    if (env != nullptr && std::strcmp(env, "scalar") == 0) return &scalar();
    const Table* v = avx2();
    return v != nullptr ? v : &scalar();
  }();
  return *chosen;
}

}  // namespace fcdram::kernels
