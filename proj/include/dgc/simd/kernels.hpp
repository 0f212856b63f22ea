#pragma once

#include <cstddef>
#include <string_view>

namespace dgc::simd {

/// Inner loops of the engine. Every variant must produce results bitwise
/// identical to the scalar reference: vector lanes run over independent
/// outputs (points, coordinates) and each output accumulates in the same
/// order as the scalar code, with no fused multiply-add.
struct KernelTable {
    std::string_view name;

    /// out[r] = sum_t (points[t * stride + r] - center[t])^2 for r < n, with
    /// points stored coordinate-major (one row of length >= n per coordinate).
    void (*squared_distances)(const double* center, const double* points, std::size_t n, std::size_t stride,
                              std::size_t d, double* out);

    /// acc[t] += coef * (x[t] - y[t]).
    void (*accumulate_scaled_difference)(double coef, const double* x, const double* y, double* acc, std::size_t d);

    /// acc[t] += x[t] - y[t].
    void (*accumulate_difference)(const double* x, const double* y, double* acc, std::size_t d);

    /// out[t] = consensus[t] + innovation[t] / rho.
    void (*combine_gradient)(const double* consensus, const double* innovation, double rho, double* out,
                             std::size_t d);

    /// x[t] -= alpha * direction[t].
    void (*descend)(double* x, const double* direction, double alpha, std::size_t d);

    /// For each point r < n, the index of the smallest of rows
    /// dist[k * stride + r], k < kcount; ties go to the lowest k.
    void (*argmin_rows)(const double* dist, std::size_t kcount, std::size_t n, std::size_t stride,
                        unsigned* out);
};

enum class Isa { scalar, avx2, automatic };

std::string_view to_string(Isa isa) noexcept;
Isa parse_isa(std::string_view name);

const KernelTable& scalar_kernels() noexcept;

/// nullptr when the variant was not compiled in or the CPU lacks it.
const KernelTable* avx2_kernels() noexcept;

/// Resolves `automatic` to the best supported variant; an unsupported
/// explicit request falls back to scalar.
const KernelTable& kernels_for(Isa isa) noexcept;

/// The default table: honours DGC_KERNELS=scalar|avx2 from the environment,
/// otherwise the best supported variant.
const KernelTable& default_kernels() noexcept;

}  // namespace dgc::simd
