#include <atomic>
#include <cstdlib>
#include <string_view>

#include "hintrelic/kernels.hpp"

namespace hintrelic::kernels {
namespace {

const KernelTable* pick_default() {
  const char* env = std::getenv("HINTRELIC_KERNELS");
  if (env != nullptr && std::string_view(env) == "scalar") return &scalar_kernels();
  if (const KernelTable* t = avx2_kernels(); t != nullptr && cpu_has_avx2()) return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> current{pick_default()};
  return current;
}

}  // namespace

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable& active() { return *slot().load(std::memory_order_relaxed); }

bool select(std::string_view name) {
  if (name == "scalar") {
    slot().store(&scalar_kernels());
    return true;
  }
  if (name == "avx2") {
    const KernelTable* t = avx2_kernels();
    if (t == nullptr || !cpu_has_avx2()) return false;
    slot().store(t);
    return true;
  }
  return false;
}

}  // namespace hintrelic::kernels
