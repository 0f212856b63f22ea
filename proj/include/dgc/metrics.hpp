#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "dgc/data.hpp"
#include "dgc/engine.hpp"
#include "dgc/losses.hpp"

namespace dgc {

/// Column chosen for each row of an n x n score matrix so that the total
/// score is maximal. Row-major input.
std::vector<std::size_t> max_weight_assignment(std::span<const double> score, std::size_t n);

/// Fraction of points matched under the best injective relabeling of
/// `predicted` onto `truth`.
double permutation_accuracy(std::span<const int> truth, std::span<const int> predicted);

double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

/// Nearest of the K x d `centers` for every point of `ds`, lowest index on ties.
std::vector<int> predict_labels(std::span<const double> centers, std::size_t clusters, const LabeledDataset& ds,
                                const MetricSpec& metric = MetricSpec::euclidean());

enum class EvaluationScope { global, local };

std::string_view to_string(EvaluationScope scope) noexcept;
EvaluationScope parse_evaluation_scope(std::string_view name);

struct UserScores {
    std::vector<double> accuracy;
    std::vector<double> ari;
    double accuracy_mean = 0.0;
    double ari_mean = 0.0;
};

/// Scores each user's centers and averages over users. With `global`, user i
/// labels every point of `dataset` by its own nearest center; with `local`,
/// only its shard.
UserScores evaluate_users(const CenterState& state, const LabeledDataset& dataset, const ShardedDataset& shards,
                          EvaluationScope scope = EvaluationScope::global,
                          const MetricSpec& metric = MetricSpec::euclidean());

}  // namespace dgc
