#pragma once

#include <cstddef>
#include <string_view>

// Dense GEMM kernels behind a runtime-selected table. The scalar table is the
// reference; vector variants must agree with it to rounding (see
// tests/test_kernels.cpp). The backend is fixed once per process unless
// overridden, so results are reproducible run to run.
namespace polynet::nn::kernels {

// All matrices row-major. `accumulate` adds into C instead of overwriting it.
using GemmFn = void (*)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c,
                        bool accumulate);

struct KernelTable {
  std::string_view name;
  GemmFn gemm_nn;  // C[m,n] = A[m,k] * B[k,n]
  GemmFn gemm_nt;  // C[m,n] = A[m,k] * B[n,k]^T
  GemmFn gemm_tn;  // C[m,n] = A[k,m]^T * B[k,n]
};

enum class Backend { Scalar, Avx2 };

const KernelTable& scalar_table();
// nullptr when the build or the CPU lacks AVX2+FMA.
const KernelTable* avx2_table();

// POLYNET_KERNELS=scalar|avx2 overrides detection on first use.
const KernelTable& active();
Backend active_backend();
// Throws Error(Config) when the backend is unavailable.
void select(Backend backend);

}  // namespace polynet::nn::kernels
