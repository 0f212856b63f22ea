#include "dgc/metrics.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <string>

#include "dgc/error.hpp"

namespace dgc {

// Shortest augmenting path (Jonker-Volgenant style potentials) on costs
// -score, 1-based internally.
std::vector<std::size_t> max_weight_assignment(std::span<const double> score, std::size_t n) {
    require(score.size() == n * n, ErrorKind::DimensionMismatch, "score matrix must be n x n");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    auto cost = [&](std::size_t i, std::size_t j) { return -score[(i - 1) * n + (j - 1)]; };
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            std::size_t i0 = p[j0], j1 = 0;
            double delta = inf;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = cost(i0, j) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> col(n);
    for (std::size_t j = 1; j <= n; ++j)
        if (p[j]) col[p[j] - 1] = j - 1;
    return col;
}

namespace {

std::vector<std::size_t> compress(std::span<const int> labels, std::size_t& count) {
    std::map<int, std::size_t> ids;
    for (int l : labels) ids.emplace(l, 0);
    std::size_t next = 0;
    for (auto& [l, id] : ids) id = next++;
    count = next;
    std::vector<std::size_t> out(labels.size());
    for (std::size_t r = 0; r < labels.size(); ++r) out[r] = ids[labels[r]];
    return out;
}

double choose2(double n) { return n * (n - 1.0) / 2.0; }

}  // namespace

double permutation_accuracy(std::span<const int> truth, std::span<const int> predicted) {
    require(truth.size() == predicted.size(), ErrorKind::LengthMismatch,
            std::to_string(truth.size()) + " vs " + std::to_string(predicted.size()) + " labels");
    require(!truth.empty(), ErrorKind::EmptyInput, "no labels");
    std::size_t kt = 0, kp = 0;
    auto t = compress(truth, kt);
    auto p = compress(predicted, kp);
    const std::size_t n = std::max(kt, kp);
    std::vector<double> counts(n * n, 0.0);  // rows: predicted, columns: truth
    for (std::size_t r = 0; r < t.size(); ++r) counts[p[r] * n + t[r]] += 1.0;
    auto col = max_weight_assignment(counts, n);
    double matched = 0.0;
    for (std::size_t i = 0; i < n; ++i) matched += counts[i * n + col[i]];
    return matched / static_cast<double>(truth.size());
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
    require(a.size() == b.size(), ErrorKind::LengthMismatch,
            std::to_string(a.size()) + " vs " + std::to_string(b.size()) + " labels");
    require(a.size() >= 2, ErrorKind::EmptyInput, "ARI needs at least two points");
    std::size_t ka = 0, kb = 0;
    auto ia = compress(a, ka);
    auto ib = compress(b, kb);
    std::vector<double> table(ka * kb, 0.0), rows(ka, 0.0), cols(kb, 0.0);
    for (std::size_t r = 0; r < ia.size(); ++r) {
        table[ia[r] * kb + ib[r]] += 1.0;
        rows[ia[r]] += 1.0;
        cols[ib[r]] += 1.0;
    }
    double index = 0.0, sa = 0.0, sb = 0.0;
    for (double c : table) index += choose2(c);
    for (double c : rows) sa += choose2(c);
    for (double c : cols) sb += choose2(c);
    const double expected = sa * sb / choose2(static_cast<double>(a.size()));
    const double denom = 0.5 * (sa + sb) - expected;
    if (denom == 0.0) {
        // Same partition iff every nonempty cell fills its row and column.
        bool same = ka == kb;
        for (std::size_t i = 0; same && i < ka; ++i)
            for (std::size_t j = 0; j < kb; ++j) {
                double c = table[i * kb + j];
                if (c != 0.0 && (c != rows[i] || c != cols[j])) {
                    same = false;
                    break;
                }
            }
        return same ? 1.0 : 0.0;
    }
    return (index - expected) / denom;
}

std::vector<int> predict_labels(std::span<const double> centers, std::size_t clusters, const LabeledDataset& ds,
                                const MetricSpec& metric) {
    const std::size_t d = ds.dim;
    require(centers.size() == clusters * d && clusters >= 1, ErrorKind::DimensionMismatch,
            "centers must be K x d");
    std::vector<int> out(ds.size());
    for (std::size_t r = 0; r < ds.size(); ++r) {
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (std::size_t k = 0; k < clusters; ++k) {
            double s = metric.squared(centers.subspan(k * d, d), ds.point(r));
            if (s < best) {
                best = s;
                arg = static_cast<int>(k);
            }
        }
        out[r] = arg;
    }
    return out;
}

std::string_view to_string(EvaluationScope scope) noexcept {
    return scope == EvaluationScope::local ? "local" : "global";
}

EvaluationScope parse_evaluation_scope(std::string_view name) {
    if (name == "global") return EvaluationScope::global;
    if (name == "local") return EvaluationScope::local;
    fail(ErrorKind::InvalidSpec, "unknown evaluation scope '" + std::string(name) + "'");
}

UserScores evaluate_users(const CenterState& state, const LabeledDataset& dataset, const ShardedDataset& shards,
                          EvaluationScope scope, const MetricSpec& metric) {
    require(dataset.has_labels(), ErrorKind::InvalidSpec, "evaluation needs labels");
    require(state.dim() == dataset.dim, ErrorKind::DimensionMismatch, "state and dataset dimensions differ");
    if (scope == EvaluationScope::local)
        require(shards.user_count() == state.users(), ErrorKind::DimensionMismatch, "state and shards disagree");
    UserScores out;
    for (std::size_t i = 0; i < state.users(); ++i) {
        std::vector<int> truth, predicted;
        if (scope == EvaluationScope::global) {
            truth = dataset.labels;
            predicted = predict_labels(state.user(i), state.clusters(), dataset, metric);
        } else {
            const LocalShard& s = shards.shards[i];
            LabeledDataset local;
            local.dim = s.dim;
            local.points = s.points;
            local.weights = s.weights;
            truth = s.labels;
            predicted = predict_labels(state.user(i), state.clusters(), local, metric);
        }
        out.accuracy.push_back(permutation_accuracy(truth, predicted));
        out.ari.push_back(truth.size() >= 2 ? adjusted_rand_index(truth, predicted) : 1.0);
    }
    for (std::size_t i = 0; i < out.accuracy.size(); ++i) {
        out.accuracy_mean += out.accuracy[i];
        out.ari_mean += out.ari[i];
    }
    if (!out.accuracy.empty()) {
        out.accuracy_mean /= static_cast<double>(out.accuracy.size());
        out.ari_mean /= static_cast<double>(out.ari.size());
    }
    return out;
}

}  // namespace dgc
