#include <cstdlib>
#include <string_view>

#include "pforge/kernels.hpp"

namespace pforge::kernels {

const Table* avx2_table_impl();

const Table* avx2_table() {
#if defined(PFORGE_HAVE_AVX2)
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") != 0;
  }();
  return supported ? avx2_table_impl() : nullptr;
#else
  return nullptr;
#endif
}

const Table& active() {
  static const Table& chosen = []() -> const Table& {
    const char* env = std::getenv("PFORGE_SIMD");
    if (env && std::string_view(env) == "scalar") return scalar_table();
    if (const Table* t = avx2_table()) return *t;
    return scalar_table();
  }();
  return chosen;
}

}  // namespace pforge::kernels
