#include "bchain/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "bchain/errors.hpp"

namespace bchain::kernels {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const Table* initial() {
  const char* env = std::getenv("BCHAIN_SIMD");
  if (env && std::strcmp(env, "scalar") == 0) return &scalar_table();
  if (cpu_has_avx2() && avx2_table()) return avx2_table();
  return &scalar_table();
}

std::atomic<const Table*>& current() {
  static std::atomic<const Table*> t{initial()};
  return t;
}

}  // namespace

const Table& active() { return *current().load(std::memory_order_relaxed); }

void select(Backend b) {
  if (b == Backend::scalar) {
    current().store(&scalar_table());
    return;
  }
  if (!cpu_has_avx2() || !avx2_table()) throw ValidationError("AVX2 kernels unavailable on this CPU");
  current().store(avx2_table());
}

std::string active_name() { return active().name; }

}  // namespace bchain::kernels
