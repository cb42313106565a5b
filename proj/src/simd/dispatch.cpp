#include <cstdlib>
#include <string_view>

#include "gkdv/simd.hpp"

namespace gkdv::simd {

const KernelTable* avx2_table_impl();

const KernelTable* avx2_table() {
#if defined(__x86_64__) || defined(_M_X64)
  static const KernelTable* table = [] () -> const KernelTable* {
    __builtin_cpu_init();
    if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma")) return nullptr;
    return avx2_table_impl();
  }();
  return table;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable& table = [] () -> const KernelTable& {
    const char* env = std::getenv("GKDV_SIMD");
    if (env != nullptr && std::string_view(env) == "scalar") return scalar_table();
    const KernelTable* vec = avx2_table();
    return vec != nullptr ? *vec : scalar_table();
  }();
  return table;
}

}  // namespace gkdv::simd
