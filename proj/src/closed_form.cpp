#include "dgc/closed_form.hpp"

#include <cmath>

#include "dgc/error.hpp"

namespace dgc::closed_form {

namespace {

std::size_t checked_dim(const LocalUpdate& in) {
    const auto d = in.center.size();
    require(d > 0, ErrorKind::DimensionMismatch, "empty center");
    require(in.points.size() == in.weights.size() * d, ErrorKind::DimensionMismatch,
            "cluster points do not match weights");
    for (const auto& nb : in.neighbor_centers) {
        require(nb.size() == d, ErrorKind::DimensionMismatch, "neighbour center dimension");
    }
    return d;
}

double sq_norm_diff(std::span<const double> a, const double* b) {
    double s = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) s += (a[t] - b[t]) * (a[t] - b[t]);
    return s;
}

// Shared shape of the expanded updates:
//   x' = (1 - alpha [ (1/rho) sum_r c_r + |N| ]) x + (alpha/rho) sum_r c_r y_r + alpha sum_j x_j
// where c_r is the per-point coefficient of the respective update.
template <class Coefficient>
std::vector<double> weighted_update(const LocalUpdate& in, Coefficient coefficient) {
    const auto d = checked_dim(in);
    const auto n = in.weights.size();
    double coef_sum = 0.0;
    std::vector<double> pull(d, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        const double* y = in.points.data() + r * d;
        const double c = coefficient(in.weights[r], sq_norm_diff(in.center, y));
        coef_sum += c;
        for (std::size_t t = 0; t < d; ++t) pull[t] += c * y[t];
    }
    std::vector<double> nb_sum(d, 0.0);
    for (const auto& nb : in.neighbor_centers)
        for (std::size_t t = 0; t < d; ++t) nb_sum[t] += nb[t];

    const double self = 1.0 - in.alpha * (coef_sum / in.rho + static_cast<double>(in.neighbor_centers.size()));
    std::vector<double> out(d);
    for (std::size_t t = 0; t < d; ++t) {
        out[t] = self * in.center[t] + (in.alpha / in.rho) * pull[t] + in.alpha * nb_sum[t];
    }
    return out;
}

}  // namespace

std::vector<double> kmeans_update(const LocalUpdate& in) {
    return weighted_update(in, [](double w, double) { return w; });
}

std::vector<double> huber_update(const LocalUpdate& in, double delta) {
    // Near points (distance <= delta) keep their weight; far points are
    // down-weighted by delta / distance.
    return weighted_update(in, [delta](double w, double s) {
        const double g = std::sqrt(s);
        return g <= delta ? w : delta * w / g;
    });
}

std::vector<double> logistic_update(const LocalUpdate& in) {
    return weighted_update(in, [](double w, double s) { return 2.0 * w / (1.0 + std::exp(-s)); });
}

std::vector<double> fair_update(const LocalUpdate& in, double eta) {
    // 4 w s / (1 + s/eta), which equals w * 4 eta (1 - eta / (eta + s)).
    return weighted_update(in, [eta](double w, double s) { return 4.0 * w * s / (1.0 + s / eta); });
}

std::vector<double> update(const LossSpec& spec, const LocalUpdate& in) {
    switch (spec.kind) {
        case LossKind::kmeans: return kmeans_update(in);
        case LossKind::huber: return huber_update(in, spec.delta);
        case LossKind::logistic: return logistic_update(in);
        case LossKind::fair: return fair_update(in, spec.eta);
    }
    return {};
}

}  // namespace dgc::closed_form
