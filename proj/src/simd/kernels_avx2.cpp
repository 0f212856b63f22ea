#include <immintrin.h>

#include "kernels_internal.hpp"

namespace dgc::simd::detail {

namespace {

void squared_distances(const double* center, const double* points, std::size_t n, std::size_t stride,
                       std::size_t d, double* out) {
    std::size_t r = 0;
    for (; r + 4 <= n; r += 4) {
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t t = 0; t < d; ++t) {
            const __m256d z = _mm256_sub_pd(_mm256_loadu_pd(points + t * stride + r), _mm256_set1_pd(center[t]));
            acc = _mm256_add_pd(acc, _mm256_mul_pd(z, z));
        }
        _mm256_storeu_pd(out + r, acc);
    }
    for (; r < n; ++r) {
        double acc = 0.0;
        for (std::size_t t = 0; t < d; ++t) {
            const double z = points[t * stride + r] - center[t];
            acc += z * z;
        }
        out[r] = acc;
    }
}

void accumulate_scaled_difference(double coef, const double* x, const double* y, double* acc, std::size_t d) {
    const __m256d c = _mm256_set1_pd(coef);
    std::size_t t = 0;
    for (; t + 4 <= d; t += 4) {
        const __m256d z = _mm256_sub_pd(_mm256_loadu_pd(x + t), _mm256_loadu_pd(y + t));
        _mm256_storeu_pd(acc + t, _mm256_add_pd(_mm256_loadu_pd(acc + t), _mm256_mul_pd(c, z)));
    }
    for (; t < d; ++t) acc[t] += coef * (x[t] - y[t]);
}

void accumulate_difference(const double* x, const double* y, double* acc, std::size_t d) {
    std::size_t t = 0;
    for (; t + 4 <= d; t += 4) {
        const __m256d z = _mm256_sub_pd(_mm256_loadu_pd(x + t), _mm256_loadu_pd(y + t));
        _mm256_storeu_pd(acc + t, _mm256_add_pd(_mm256_loadu_pd(acc + t), z));
    }
    for (; t < d; ++t) acc[t] += x[t] - y[t];
}

void combine_gradient(const double* consensus, const double* innovation, double rho, double* out, std::size_t d) {
    const __m256d r = _mm256_set1_pd(rho);
    std::size_t t = 0;
    for (; t + 4 <= d; t += 4) {
        const __m256d v = _mm256_add_pd(_mm256_loadu_pd(consensus + t), _mm256_div_pd(_mm256_loadu_pd(innovation + t), r));
        _mm256_storeu_pd(out + t, v);
    }
    for (; t < d; ++t) out[t] = consensus[t] + innovation[t] / rho;
}

void descend(double* x, const double* direction, double alpha, std::size_t d) {
    const __m256d a = _mm256_set1_pd(alpha);
    std::size_t t = 0;
    for (; t + 4 <= d; t += 4) {
        const __m256d v = _mm256_sub_pd(_mm256_loadu_pd(x + t), _mm256_mul_pd(a, _mm256_loadu_pd(direction + t)));
        _mm256_storeu_pd(x + t, v);
    }
    for (; t < d; ++t) x[t] -= alpha * direction[t];
}

void argmin_rows(const double* dist, std::size_t kcount, std::size_t n, std::size_t stride, unsigned* out) {
    std::size_t r = 0;
    for (; r + 4 <= n; r += 4) {
        __m256d best = _mm256_loadu_pd(dist + r);
        __m256d best_index = _mm256_setzero_pd();
        for (std::size_t k = 1; k < kcount; ++k) {
            const __m256d v = _mm256_loadu_pd(dist + k * stride + r);
            // Strictly smaller only, so ties keep the lowest index.
            const __m256d lower = _mm256_cmp_pd(v, best, _CMP_LT_OQ);
            best = _mm256_blendv_pd(best, v, lower);
            best_index = _mm256_blendv_pd(best_index, _mm256_set1_pd(static_cast<double>(k)), lower);
        }
        alignas(32) double idx[4];
        _mm256_store_pd(idx, best_index);
        for (int l = 0; l < 4; ++l) out[r + l] = static_cast<unsigned>(idx[l]);
    }
    for (; r < n; ++r) {
        unsigned b = 0;
        double bv = dist[r];
        for (std::size_t k = 1; k < kcount; ++k) {
            const double v = dist[k * stride + r];
            if (v < bv) {
                bv = v;
                b = static_cast<unsigned>(k);
            }
        }
        out[r] = b;
    }
}

}  // namespace

const KernelTable& avx2_table() noexcept {
    static const KernelTable table{"avx2",          &squared_distances, &accumulate_scaled_difference,
                                   &accumulate_difference, &combine_gradient, &descend, &argmin_rows};
    return table;
}

}  // namespace dgc::simd::detail
