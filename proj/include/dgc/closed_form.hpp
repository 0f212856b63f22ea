#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dgc/losses.hpp"

namespace dgc::closed_form {

/// Local inputs of one center update of user i, cluster k: the current
/// estimate, the neighbours' estimates of the same center, and the points
/// (row-major, n x d) currently assigned to that cluster with their weights.
struct LocalUpdate {
    std::span<const double> center;
    std::vector<std::span<const double>> neighbor_centers;
    std::span<const double> points;
    std::span<const double> weights;
    double alpha = 0.0;
    double rho = 1.0;
};

/// Per-loss expanded center updates, written term by term in their
/// convex-combination form. They exist as an independent check of the
/// generic gradient step and are not used by the engine.
std::vector<double> kmeans_update(const LocalUpdate& in);
std::vector<double> huber_update(const LocalUpdate& in, double delta);
std::vector<double> logistic_update(const LocalUpdate& in);
std::vector<double> fair_update(const LocalUpdate& in, double eta);

/// Dispatches on spec.kind (euclidean metric only).
std::vector<double> update(const LossSpec& spec, const LocalUpdate& in);

}  // namespace dgc::closed_form
