#pragma once

#include "polynet/nn/kernels.hpp"

namespace polynet::nn::kernels::detail {

#if defined(POLYNET_HAVE_AVX2_KERNELS)
// Defined in kernels_avx2.cpp, which is built with -mavx2 -mfma. Only call
// after the CPU has been checked.
const KernelTable& avx2_table_unchecked();
#endif

}  // namespace polynet::nn::kernels::detail
