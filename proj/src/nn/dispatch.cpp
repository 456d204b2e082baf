#include "kernels_impl.hpp"

#include "polynet/error.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace polynet::nn::kernels {

namespace {

bool cpu_has_avx2_fma() {
#if defined(POLYNET_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* detect() {
  const KernelTable* fast = avx2_table();
  if (const char* env = std::getenv("POLYNET_KERNELS")) {
    const std::string choice(env);
    if (choice == "scalar") return &scalar_table();
    if (choice == "avx2" && fast) return fast;
  }
  return fast ? fast : &scalar_table();
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> current{detect()};
  return current;
}

}  // namespace

const KernelTable* avx2_table() {
#if defined(POLYNET_HAVE_AVX2_KERNELS)
  static const bool supported = cpu_has_avx2_fma();
  return supported ? &detail::avx2_table_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

Backend active_backend() { return &active() == &scalar_table() ? Backend::Scalar : Backend::Avx2; }

void select(Backend backend) {
  if (backend == Backend::Scalar) {
    slot().store(&scalar_table(), std::memory_order_release);
    return;
  }
  const KernelTable* fast = avx2_table();
  if (!fast) throw Error(ErrorCode::Config, "AVX2 kernels are not available on this machine");
  slot().store(fast, std::memory_order_release);
}

}  // namespace polynet::nn::kernels
