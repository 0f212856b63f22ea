#include "kernels_internal.hpp"

namespace dgc::simd::detail {

namespace {

void squared_distances(const double* center, const double* points, std::size_t n, std::size_t stride,
                       std::size_t d, double* out) {
    for (std::size_t r = 0; r < n; ++r) out[r] = 0.0;
    for (std::size_t t = 0; t < d; ++t) {
        const double c = center[t];
        const double* row = points + t * stride;
        for (std::size_t r = 0; r < n; ++r) {
            const double z = row[r] - c;
            out[r] += z * z;
        }
    }
}

void accumulate_scaled_difference(double coef, const double* x, const double* y, double* acc, std::size_t d) {
    for (std::size_t t = 0; t < d; ++t) acc[t] += coef * (x[t] - y[t]);
}

void accumulate_difference(const double* x, const double* y, double* acc, std::size_t d) {
    for (std::size_t t = 0; t < d; ++t) acc[t] += x[t] - y[t];
}

void combine_gradient(const double* consensus, const double* innovation, double rho, double* out, std::size_t d) {
    for (std::size_t t = 0; t < d; ++t) out[t] = consensus[t] + innovation[t] / rho;
}

void descend(double* x, const double* direction, double alpha, std::size_t d) {
    for (std::size_t t = 0; t < d; ++t) x[t] -= alpha * direction[t];
}

void argmin_rows(const double* dist, std::size_t kcount, std::size_t n, std::size_t stride, unsigned* out) {
    for (std::size_t r = 0; r < n; ++r) {
        unsigned best = 0;
        double best_value = dist[r];
        for (std::size_t k = 1; k < kcount; ++k) {
            const double v = dist[k * stride + r];
            if (v < best_value) {
                best_value = v;
                best = static_cast<unsigned>(k);
            }
        }
        out[r] = best;
    }
}

}  // namespace

const KernelTable& scalar_table() noexcept {
    static const KernelTable table{"scalar",          &squared_distances, &accumulate_scaled_difference,
                                   &accumulate_difference, &combine_gradient, &descend, &argmin_rows};
    return table;
}

}  // namespace dgc::simd::detail
