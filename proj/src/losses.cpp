#include "dgc/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dgc/error.hpp"

namespace dgc {

std::string_view to_string(LossKind kind) noexcept {
    switch (kind) {
        case LossKind::kmeans: return "kmeans";
        case LossKind::huber: return "huber";
        case LossKind::logistic: return "logistic";
        case LossKind::fair: return "fair";
    }
    return "unknown";
}

std::string_view to_string(MetricKind kind) noexcept {
    return kind == MetricKind::euclidean ? "euclidean" : "mahalanobis";
}

LossKind parse_loss_kind(std::string_view name) {
    for (auto kind : {LossKind::kmeans, LossKind::huber, LossKind::logistic, LossKind::fair}) {
        if (name == to_string(kind)) return kind;
    }
    fail(ErrorKind::InvalidSpec, "unknown loss '" + std::string(name) + "'");
}

MetricKind parse_metric_kind(std::string_view name) {
    if (name == "euclidean") return MetricKind::euclidean;
    if (name == "mahalanobis") return MetricKind::mahalanobis;
    fail(ErrorKind::InvalidSpec, "unknown metric '" + std::string(name) + "'");
}

MetricSpec MetricSpec::mahalanobis(std::vector<double> matrix, std::size_t dim) {
    require(dim > 0 && matrix.size() == dim * dim, ErrorKind::DimensionMismatch,
            "mahalanobis matrix must be " + std::to_string(dim) + " x " + std::to_string(dim));
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = i + 1; j < dim; ++j) {
            require(std::abs(matrix[i * dim + j] - matrix[j * dim + i]) <= 1e-12, ErrorKind::InvalidSpec,
                    "mahalanobis matrix is not symmetric");
        }
    }
    // Cholesky pivots must all be positive.
    std::vector<double> l(dim * dim, 0.0);
    for (std::size_t j = 0; j < dim; ++j) {
        double pivot = matrix[j * dim + j];
        for (std::size_t k = 0; k < j; ++k) pivot -= l[j * dim + k] * l[j * dim + k];
        require(pivot > 0.0, ErrorKind::InvalidSpec, "mahalanobis matrix is not positive definite");
        l[j * dim + j] = std::sqrt(pivot);
        for (std::size_t i = j + 1; i < dim; ++i) {
            double s = matrix[i * dim + j];
            for (std::size_t k = 0; k < j; ++k) s -= l[i * dim + k] * l[j * dim + k];
            l[i * dim + j] = s / l[j * dim + j];
        }
    }
    MetricSpec m;
    m.kind_ = MetricKind::mahalanobis;
    m.dim_ = dim;
    m.matrix_ = std::move(matrix);
    return m;
}

double MetricSpec::squared(std::span<const double> x, std::span<const double> y) const {
    require(x.size() == y.size(), ErrorKind::DimensionMismatch, "distance between points of different dimension");
    const auto d = x.size();
    if (kind_ == MetricKind::euclidean) {
        double s = 0.0;
        for (std::size_t t = 0; t < d; ++t) {
            const double z = x[t] - y[t];
            s += z * z;
        }
        return s;
    }
    require(d == dim_, ErrorKind::DimensionMismatch, "point dimension does not match mahalanobis matrix");
    double s = 0.0;
    for (std::size_t r = 0; r < d; ++r) {
        double row = 0.0;
        for (std::size_t c = 0; c < d; ++c) row += matrix_[r * d + c] * (x[c] - y[c]);
        s += (x[r] - y[r]) * row;
    }
    return std::max(s, 0.0);
}

void MetricSpec::apply(std::span<const double> z, std::span<double> out) const {
    const auto d = z.size();
    if (kind_ == MetricKind::euclidean) {
        std::copy(z.begin(), z.end(), out.begin());
        return;
    }
    require(d == dim_, ErrorKind::DimensionMismatch, "point dimension does not match mahalanobis matrix");
    for (std::size_t r = 0; r < d; ++r) {
        double row = 0.0;
        for (std::size_t c = 0; c < d; ++c) row += matrix_[r * d + c] * z[c];
        out[r] = row;
    }
}

void LossSpec::validate() const {
    if (kind == LossKind::huber) require(delta > 0.0, ErrorKind::InvalidSpec, "huber loss needs delta > 0");
    if (kind == LossKind::fair) require(eta > 0.0, ErrorKind::InvalidSpec, "fair loss needs eta > 0");
}

double distance(const MetricSpec& metric, std::span<const double> x, std::span<const double> y) {
    return std::sqrt(metric.squared(x, y));
}

double loss_of_squared_distance(const LossSpec& spec, double s) noexcept {
    switch (spec.kind) {
        case LossKind::kmeans:
            return 0.5 * s;
        case LossKind::huber: {
            const double g = std::sqrt(s);
            if (g <= spec.delta) return 0.5 * s;
            return spec.delta * g - 0.5 * spec.delta * spec.delta;
        }
        case LossKind::logistic:
            // log(1 + e^s) without overflow for distant points.
            if (s > 30.0) return s + std::log1p(std::exp(-s));
            return std::log1p(std::exp(s));
        case LossKind::fair: {
            const double u = s / spec.eta;
            return 2.0 * spec.eta * spec.eta * (u - std::log1p(u));
        }
    }
    return 0.0;
}

double gradient_scale(const LossSpec& spec, double s) noexcept {
    switch (spec.kind) {
        case LossKind::kmeans:
            return 1.0;
        case LossKind::huber: {
            const double g = std::sqrt(s);
            return g <= spec.delta ? 1.0 : spec.delta / g;
        }
        case LossKind::logistic:
            return 2.0 / (1.0 + std::exp(-s));
        case LossKind::fair:
            return 4.0 * spec.eta * (1.0 - spec.eta / (spec.eta + s));
    }
    return 0.0;
}

double loss_value(const LossSpec& spec, std::span<const double> x, std::span<const double> y) {
    return loss_of_squared_distance(spec, spec.metric.squared(x, y));
}

void loss_gradient(const LossSpec& spec, std::span<const double> x, std::span<const double> y, std::span<double> out) {
    require(x.size() == y.size() && out.size() == x.size(), ErrorKind::DimensionMismatch,
            "loss_gradient dimension mismatch");
    const double gamma = gradient_scale(spec, spec.metric.squared(x, y));
    std::vector<double> z(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) z[t] = x[t] - y[t];
    spec.metric.apply(z, out);
    for (auto& e : out) e *= gamma;
}

std::vector<double> loss_gradient(const LossSpec& spec, std::span<const double> x, std::span<const double> y) {
    std::vector<double> out(x.size());
    loss_gradient(spec, x, y, out);
    return out;
}

SmoothnessBound smoothness_bound(const LossSpec& spec) noexcept {
    switch (spec.kind) {
        case LossKind::kmeans:
        case LossKind::huber:
            return {1.0};
        case LossKind::logistic:
            return {2.0 + 4.0 * std::exp(-1.0)};
        case LossKind::fair:
            return {8.0 * spec.eta + 8.0 * std::max(1.0, spec.eta * spec.eta)};
    }
    return {1.0};
}

}  // namespace dgc
