#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace dgc {

enum class LossKind { kmeans, huber, logistic, fair };
enum class MetricKind { euclidean, mahalanobis };

std::string_view to_string(LossKind kind) noexcept;
std::string_view to_string(MetricKind kind) noexcept;
LossKind parse_loss_kind(std::string_view name);
MetricKind parse_metric_kind(std::string_view name);

/// Assignment distance g. The Mahalanobis variant stores A together with its
/// Cholesky factor; construction rejects matrices that are not symmetric
/// positive definite.
class MetricSpec {
public:
    MetricSpec() = default;

    static MetricSpec euclidean() { return {}; }
    static MetricSpec mahalanobis(std::vector<double> matrix, std::size_t dim);

    MetricKind kind() const noexcept { return kind_; }
    std::size_t dim() const noexcept { return dim_; }
    std::span<const double> matrix() const noexcept { return matrix_; }

    /// g(x, y)^2.
    double squared(std::span<const double> x, std::span<const double> y) const;

    /// out = A z (identity for euclidean).
    void apply(std::span<const double> z, std::span<double> out) const;

private:
    MetricKind kind_ = MetricKind::euclidean;
    std::size_t dim_ = 0;
    std::vector<double> matrix_;
};

struct LossSpec {
    LossKind kind = LossKind::kmeans;
    double delta = 5.0;  // huber threshold
    double eta = 1.0;    // fair scale
    MetricSpec metric;

    /// Throws InvalidSpec for nonpositive delta / eta.
    void validate() const;
};

struct SmoothnessBound {
    double beta;
};

double distance(const MetricSpec& metric, std::span<const double> x, std::span<const double> y);

/// f as a scalar transform of the squared distance s = g^2.
double loss_of_squared_distance(const LossSpec& spec, double s) noexcept;

/// gamma(x, y) such that grad_x f = gamma * A (x - y); function of s = g^2.
/// Zero distance yields a finite gamma (the gradient itself is zero there).
double gradient_scale(const LossSpec& spec, double s) noexcept;

double loss_value(const LossSpec& spec, std::span<const double> x, std::span<const double> y);
void loss_gradient(const LossSpec& spec, std::span<const double> x, std::span<const double> y, std::span<double> out);
std::vector<double> loss_gradient(const LossSpec& spec, std::span<const double> x, std::span<const double> y);

/// Lipschitz constant of grad_x f for one unit-weight sample.
SmoothnessBound smoothness_bound(const LossSpec& spec) noexcept;

}  // namespace dgc
