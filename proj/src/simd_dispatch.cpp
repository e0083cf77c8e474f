#include <atomic>
#include <cstdlib>
#include <cstring>

#include "nct/simd.hpp"

namespace nct::simd {
namespace {

const Kernels *choose() {
  const char *env = std::getenv("NCT_SIMD");
  if (env && std::strcmp(env, "scalar") == 0) return &scalar_kernels();
  return avx2_available() ? &avx2_kernels() : &scalar_kernels();
}

std::atomic<const Kernels *> &slot() {
  static std::atomic<const Kernels *> s{choose()};
  return s;
}

}  // namespace

bool avx2_available() {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

const Kernels &kernels() { return *slot().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
  if (isa == Isa::Avx2 && !avx2_available()) return;
  slot().store(isa == Isa::Avx2 ? &avx2_kernels() : &scalar_kernels());
}

std::string isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

}  // namespace nct::simd
