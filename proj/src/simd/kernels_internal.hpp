#pragma once

#include "dgc/simd/kernels.hpp"

namespace dgc::simd::detail {

const KernelTable& scalar_table() noexcept;
#if defined(DGC_HAVE_AVX2)
const KernelTable& avx2_table() noexcept;
#endif

}  // namespace dgc::simd::detail
