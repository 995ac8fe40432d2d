#include <cstdlib>
#include <cstring>

#include "rigidtrack/error.hpp"
#include "rigidtrack/kernels.hpp"

namespace rigidtrack::kernels {

const Dispatch* avx2_table();  // defined in kernels_avx2.cpp

namespace {

bool cpu_has_avx2_fma() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

}  // namespace

bool simd_available() {
  static const bool ok = avx2_table() != nullptr && cpu_has_avx2_fma();
  return ok;
}

const Dispatch& simd() {
  if (!simd_available()) {
    fail(ErrorKind::config, "SIMD kernels unavailable on this host");
  }
  return *avx2_table();
}

const Dispatch& active() {
  static const Dispatch* chosen = [] {
    const char* force = std::getenv("RIGIDTRACK_FORCE_SCALAR");
    if (force && std::strcmp(force, "1") == 0) return &scalar();
    return simd_available() ? avx2_table() : &scalar();
  }();
  return *chosen;
}

}  // namespace rigidtrack::kernels
