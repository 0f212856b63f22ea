#include "dgc/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "dgc/error.hpp"
#include "dgc/rng.hpp"
#include "dgc/worker_pool.hpp"

namespace dgc {

bool CenterState::all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

std::size_t Clustering::total_points() const noexcept {
    std::size_t n = 0;
    for (const auto& a : assignment) n += a.size();
    return n;
}

std::string_view to_string(StepRule rule) noexcept {
    switch (rule) {
        case StepRule::theorem1: return "auto_theorem1";
        case StepRule::experimental: return "auto_experimental";
        case StepRule::explicit_value: return "explicit";
    }
    return "?";
}

std::string_view to_string(InitScheme scheme) noexcept {
    switch (scheme) {
        case InitScheme::random_local_sample: return "random_local_sample";
        case InitScheme::random_shared_sample: return "random_shared_sample";
        case InitScheme::warm_start_per_class: return "warm_start_per_class";
        case InitScheme::explicit_centers: return "explicit";
    }
    return "?";
}

std::string_view to_string(WeightConvention w) noexcept {
    return w == WeightConvention::unit ? "unit" : "normalized";
}

std::string_view to_string(ExecutionMode mode) noexcept {
    return mode == ExecutionMode::parallel ? "parallel" : "sequential";
}

InitScheme parse_init_scheme(std::string_view name) {
    if (name == "random_local_sample" || name == "random") return InitScheme::random_local_sample;
    if (name == "random_shared_sample" || name == "shared") return InitScheme::random_shared_sample;
    if (name == "warm_start_per_class" || name == "warm_start") return InitScheme::warm_start_per_class;
    if (name == "explicit") return InitScheme::explicit_centers;
    fail(ErrorKind::InvalidSpec, "unknown init scheme '" + std::string(name) + "'");
}

WeightConvention parse_weight_convention(std::string_view name) {
    if (name == "normalized") return WeightConvention::normalized;
    if (name == "unit") return WeightConvention::unit;
    fail(ErrorKind::InvalidSpec, "unknown weight convention '" + std::string(name) + "'");
}

ExecutionMode parse_execution_mode(std::string_view name) {
    if (name == "sequential") return ExecutionMode::sequential;
    if (name == "parallel") return ExecutionMode::parallel;
    fail(ErrorKind::InvalidSpec, "unknown execution mode '" + std::string(name) + "'");
}

void RunConfig::validate() const {
    require(rho >= 1.0 && std::isfinite(rho), ErrorKind::InvalidSpec, "rho must be >= 1");
    require(B >= 1, ErrorKind::InvalidSpec, "B must be >= 1");
    require(T >= 1, ErrorKind::InvalidSpec, "T must be >= 1");
    require(K >= 1, ErrorKind::InvalidSpec, "K must be >= 1");
    if (alpha.rule == StepRule::explicit_value)
        require(alpha.value > 0.0 && std::isfinite(alpha.value), ErrorKind::InvalidSpec,
                "explicit alpha must be > 0");
    require(early_stop_tolerance >= 0.0, ErrorKind::InvalidSpec, "early stop tolerance must be >= 0");
    require(early_stop_window >= 1, ErrorKind::InvalidSpec, "early stop window must be >= 1");
    if (init.scheme == InitScheme::explicit_centers)
        require(init.centers.has_value(), ErrorKind::InvalidSpec, "explicit init needs centers");
    loss.validate();
}

double compute_step_size(StepRule rule, double beta, double rho, double lam_max, std::size_t m,
                         std::size_t max_shard, double explicit_value) {
    require(rho >= 1.0, ErrorKind::InvalidSpec, "rho must be >= 1");
    switch (rule) {
        case StepRule::theorem1:
            require(beta > 0.0 && lam_max >= 0.0, ErrorKind::InvalidSpec, "beta must be > 0, lam_max >= 0");
            return 0.99 / (beta / rho + lam_max);
        case StepRule::experimental:
            require(m >= 1 && max_shard >= 1 && lam_max >= 0.0, ErrorKind::InvalidSpec,
                    "experimental step needs m, max_shard >= 1");
            return 1.0 / (2.0 * static_cast<double>(m) * static_cast<double>(max_shard) / rho + lam_max + 1.0);
        case StepRule::explicit_value:
            require(explicit_value > 0.0, ErrorKind::InvalidSpec, "explicit alpha must be > 0");
            return explicit_value;
    }
    fail(ErrorKind::InvalidSpec, "unknown step rule");
}

double cost_smoothness(const LossSpec& loss, const ShardedDataset& shards) {
    double mass = 1.0;
    for (const auto& s : shards.shards) {
        double w = 0.0;
        for (double v : s.weights) w += v;
        mass = std::max(mass, w);
    }
    double beta = smoothness_bound(loss).beta * mass;
    if (loss.metric.kind() == MetricKind::mahalanobis) {
        double f = 0.0;
        for (double a : loss.metric.matrix()) f += a * a;
        beta *= std::sqrt(f);
    }
    return beta;
}

namespace {

void check_shapes(const CenterState& state, const ShardedDataset& shards) {
    require(state.users() == shards.user_count(), ErrorKind::DimensionMismatch,
            "state has " + std::to_string(state.users()) + " users, data has " +
                std::to_string(shards.user_count()));
    require(state.dim() == shards.dim, ErrorKind::DimensionMismatch,
            "state dim " + std::to_string(state.dim()) + " vs data dim " + std::to_string(shards.dim));
}

void check_clustering(const Clustering& c, const CenterState& state, const ShardedDataset& shards) {
    require(c.assignment.size() == shards.user_count() && c.clusters == state.clusters(),
            ErrorKind::DimensionMismatch, "clustering does not match state");
    for (std::size_t i = 0; i < c.assignment.size(); ++i) {
        require(c.assignment[i].size() == shards.shards[i].size(), ErrorKind::DimensionMismatch,
                "clustering of user " + std::to_string(i) + " does not match its shard");
        for (unsigned a : c.assignment[i])
            require(a < c.clusters, ErrorKind::DimensionMismatch, "cluster index out of range");
    }
}

void check_graph(const Graph& graph, const CenterState& state) {
    require(graph.size() == state.users(), ErrorKind::DimensionMismatch,
            "graph has " + std::to_string(graph.size()) + " vertices, state has " + std::to_string(state.users()) +
                " users");
}

// members[i * K + k] lists the local indices of C_i(k) in shard order.
std::vector<std::vector<std::size_t>> build_members(const Clustering& c) {
    const std::size_t K = c.clusters;
    std::vector<std::vector<std::size_t>> members(c.assignment.size() * K);
    for (std::size_t i = 0; i < c.assignment.size(); ++i)
        for (std::size_t r = 0; r < c.assignment[i].size(); ++r) members[i * K + c.assignment[i][r]].push_back(r);
    return members;
}

double squared_euclidean(const double* x, const double* y, std::size_t d) {
    double s = 0.0;
    for (std::size_t t = 0; t < d; ++t) {
        double z = x[t] - y[t];
        s += z * z;
    }
    return s;
}

struct Scratch {
    std::vector<double> cons, innov, z, az;
    explicit Scratch(std::size_t d) : cons(d), innov(d), z(d), az(d) {}
};

// (sum_j (x_i(k) - x_j(k))) + (1/rho) sum_r w grad f, for one (i, k).
void local_gradient(const CenterState& state, std::size_t i, std::size_t k, const std::vector<std::size_t>& members,
                    const Graph& graph, const LocalShard& shard, const LossSpec& loss, double rho,
                    const simd::KernelTable& kt, Scratch& sc, double* out) {
    const std::size_t d = state.dim();
    const double* x = state.center(i, k).data();
    std::fill(sc.cons.begin(), sc.cons.end(), 0.0);
    std::fill(sc.innov.begin(), sc.innov.end(), 0.0);
    for (std::size_t j : graph.neighbors(i)) kt.accumulate_difference(x, state.center(j, k).data(), sc.cons.data(), d);

    const bool mahalanobis = loss.metric.kind() == MetricKind::mahalanobis;
    for (std::size_t r : members) {
        const double* y = shard.points.data() + r * d;
        double w = shard.weights[r];
        if (!mahalanobis) {
            double gamma = 1.0;
            if (loss.kind != LossKind::kmeans) gamma = gradient_scale(loss, squared_euclidean(x, y, d));
            kt.accumulate_scaled_difference(w * gamma, x, y, sc.innov.data(), d);
        } else {
            for (std::size_t t = 0; t < d; ++t) sc.z[t] = x[t] - y[t];
            loss.metric.apply(sc.z, sc.az);
            double s = 0.0;
            for (std::size_t t = 0; t < d; ++t) s += sc.z[t] * sc.az[t];
            double coef = w * gradient_scale(loss, std::max(s, 0.0));
            for (std::size_t t = 0; t < d; ++t) sc.innov[t] += coef * sc.az[t];
        }
    }
    kt.combine_gradient(sc.cons.data(), sc.innov.data(), rho, out, d);
}

template <class F>
void for_each_user(std::size_t m, WorkerPool* pool, const F& f) {
    if (pool && m > 1) {
        pool->run(m, [&](std::size_t i) { f(i); });
    } else {
        for (std::size_t i = 0; i < m; ++i) f(i);
    }
}

}  // namespace

CenterState initialize_centers(const ShardedDataset& shards, const RunConfig& config) {
    const std::size_t m = shards.user_count();
    const std::size_t K = config.K;
    const std::size_t d = shards.dim;
    require(m >= 1, ErrorKind::EmptyInput, "no users");
    if (config.init.scheme == InitScheme::explicit_centers) {
        require(config.init.centers.has_value(), ErrorKind::InvalidSpec, "explicit init needs centers");
        const CenterState& c = *config.init.centers;
        require(c.users() == m && c.clusters() == K && c.dim() == d, ErrorKind::DimensionMismatch,
                "explicit centers must be m x K x d");
        require(c.all_finite(), ErrorKind::NonFiniteState, "explicit centers contain non-finite values");
        return c;
    }

    CenterState state(m, K, d);
    if (config.init.scheme == InitScheme::random_shared_sample) {
        std::vector<const double*> pooled;
        for (const LocalShard& s : shards.shards)
            for (std::size_t r = 0; r < s.size(); ++r) pooled.push_back(s.points.data() + r * d);
        require(pooled.size() >= K, ErrorKind::TooFewPoints, "shared init needs at least K points");
        CounterRng rng(config.seed, stream_id("init.random_shared_sample"));
        auto picks = sample_without_replacement(pooled.size(), K, rng);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t k = 0; k < K; ++k) std::copy_n(pooled[picks[k]], d, state.center(i, k).data());
        return state;
    }
    const bool warm = config.init.scheme == InitScheme::warm_start_per_class;
    for (std::size_t i = 0; i < m; ++i) {
        const LocalShard& s = shards.shards[i];
        require(s.size() >= 1, ErrorKind::TooFewPoints, "user " + std::to_string(i) + " has no points");
        CounterRng rng(config.seed, stream_id(warm ? "init.warm_start" : "init.random_local_sample"), i);
        auto put = [&](std::size_t k, std::size_t r) {
            std::copy_n(s.points.data() + r * d, d, state.center(i, k).data());
        };
        if (warm) {
            require(s.labels.size() == s.size(), ErrorKind::InvalidSpec, "warm start requires labels");
            std::vector<std::vector<std::size_t>> by_class(K);
            for (std::size_t r = 0; r < s.size(); ++r) {
                require(s.labels[r] >= 0 && static_cast<std::size_t>(s.labels[r]) < K, ErrorKind::InvalidSpec,
                        "warm start requires K to cover every class label");
                by_class[static_cast<std::size_t>(s.labels[r])].push_back(r);
            }
            for (std::size_t k = 0; k < K; ++k) {
                // A class this user does not hold falls back to a random local point.
                const auto& pool = by_class[k];
                put(k, pool.empty() ? rng.below(s.size()) : pool[rng.below(pool.size())]);
            }
        } else if (s.size() >= K) {
            auto picks = sample_without_replacement(s.size(), K, rng);
            for (std::size_t k = 0; k < K; ++k) put(k, picks[k]);
        } else {
            for (std::size_t k = 0; k < K; ++k) put(k, rng.below(s.size()));
        }
    }
    return state;
}

Clustering assign_clusters(const CenterState& state, const ShardedDataset& shards, const MetricSpec& metric,
                           const simd::KernelTable& kt, WorkerPool* pool) {
    check_shapes(state, shards);
    if (metric.kind() == MetricKind::mahalanobis)
        require(metric.dim() == shards.dim, ErrorKind::DimensionMismatch, "metric dimension mismatch");
    const std::size_t K = state.clusters();
    const std::size_t d = state.dim();
    Clustering out;
    out.clusters = K;
    out.assignment.resize(shards.user_count());
    for_each_user(shards.user_count(), pool, [&](std::size_t i) {
        const LocalShard& s = shards.shards[i];
        const std::size_t n = s.size();
        std::vector<double> dist(K * n);
        if (metric.kind() == MetricKind::euclidean) {
            require(s.coords.size() == n * d, ErrorKind::DimensionMismatch, "shard coordinates not built");
            for (std::size_t k = 0; k < K; ++k)
                kt.squared_distances(state.center(i, k).data(), s.coords.data(), n, n, d, dist.data() + k * n);
        } else {
            for (std::size_t k = 0; k < K; ++k)
                for (std::size_t r = 0; r < n; ++r) dist[k * n + r] = metric.squared(state.center(i, k), s.point(r));
        }
        out.assignment[i].resize(n);
        kt.argmin_rows(dist.data(), K, n, n, out.assignment[i].data());
    });
    return out;
}

std::vector<double> relaxed_gradient(const CenterState& state, const Clustering& clustering, const Graph& graph,
                                     const ShardedDataset& shards, const LossSpec& loss, double rho,
                                     const simd::KernelTable& kt) {
    check_shapes(state, shards);
    check_clustering(clustering, state, shards);
    check_graph(graph, state);
    const std::size_t K = state.clusters();
    const std::size_t d = state.dim();
    auto members = build_members(clustering);
    std::vector<double> grad(state.values().size());
    Scratch sc(d);
    for (std::size_t i = 0; i < state.users(); ++i)
        for (std::size_t k = 0; k < K; ++k)
            local_gradient(state, i, k, members[i * K + k], graph, shards.shards[i], loss, rho, kt, sc,
                           grad.data() + (i * K + k) * d);
    return grad;
}

CenterState center_round(const CenterState& state, const Clustering& clustering, const Graph& graph,
                         const ShardedDataset& shards, const LossSpec& loss, double rho, double alpha, std::size_t B,
                         const simd::KernelTable& kt, WorkerPool* pool) {
    check_shapes(state, shards);
    check_clustering(clustering, state, shards);
    check_graph(graph, state);
    require(alpha > 0.0, ErrorKind::InvalidSpec, "alpha must be > 0");
    require(rho > 0.0, ErrorKind::InvalidSpec, "rho must be > 0");
    const std::size_t K = state.clusters();
    const std::size_t d = state.dim();
    const std::size_t m = state.users();
    auto members = build_members(clustering);

    CenterState cur = state;
    CenterState next = state;
    for (std::size_t b = 0; b < B; ++b) {
        // Every read below is from `cur`; every write goes to `next`.
        for_each_user(m, pool, [&](std::size_t i) {
            Scratch sc(d);
            std::vector<double> grad(d);
            for (std::size_t k = 0; k < K; ++k) {
                local_gradient(cur, i, k, members[i * K + k], graph, shards.shards[i], loss, rho, kt, sc,
                               grad.data());
                double* x = next.center(i, k).data();
                std::copy_n(cur.center(i, k).data(), d, x);
                kt.descend(x, grad.data(), alpha, d);
            }
        });
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t k = 0; k < K; ++k)
                for (double v : next.center(i, k))
                    if (!std::isfinite(v))
                        fail(ErrorKind::NonFiniteState, "sub-round " + std::to_string(b) + ", user " +
                                                            std::to_string(i) + ", cluster " + std::to_string(k));
        std::swap(cur, next);
    }
    return cur;
}

double cost_J(const CenterState& state, const Clustering& clustering, const ShardedDataset& shards,
              const LossSpec& loss) {
    check_shapes(state, shards);
    check_clustering(clustering, state, shards);
    const std::size_t K = state.clusters();
    auto members = build_members(clustering);
    double total = 0.0;
    for (std::size_t i = 0; i < state.users(); ++i) {
        const LocalShard& s = shards.shards[i];
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t r : members[i * K + k])
                total += s.weights[r] * loss_of_squared_distance(loss, loss.metric.squared(state.center(i, k), s.point(r)));
    }
    return total;
}

double cost_J_rho(const CenterState& state, const Clustering& clustering, const ShardedDataset& shards,
                  const Graph& graph, const LossSpec& loss, double rho) {
    check_graph(graph, state);
    require(rho > 0.0, ErrorKind::InvalidSpec, "rho must be > 0");
    double quad = 0.0;
    const std::size_t d = state.dim();
    for (std::size_t i = 0; i < state.users(); ++i)
        for (std::size_t k = 0; k < state.clusters(); ++k) {
            auto x = state.center(i, k);
            for (std::size_t j : graph.neighbors(i)) {
                auto y = state.center(j, k);
                for (std::size_t t = 0; t < d; ++t) quad += x[t] * (x[t] - y[t]);
            }
        }
    return cost_J(state, clustering, shards, loss) / rho + 0.5 * quad;
}

double consensus_gap(const CenterState& state) {
    double best = 0.0;
    for (std::size_t i = 0; i < state.users(); ++i)
        for (std::size_t j = i + 1; j < state.users(); ++j) {
            auto a = state.user(i);
            auto b = state.user(j);
            double s = 0.0;
            for (std::size_t t = 0; t < a.size(); ++t) {
                double z = a[t] - b[t];
                s += z * z;
            }
            best = std::max(best, std::sqrt(s));
        }
    return best;
}

double fixed_point_residual(const CenterState& state, const Clustering& clustering, const ShardedDataset& shards,
                            const Graph& graph, const LossSpec& loss, double rho, const simd::KernelTable& kt) {
    auto g = relaxed_gradient(state, clustering, graph, shards, loss, rho, kt);
    double s = 0.0;
    for (double v : g) s += v * v;
    return std::sqrt(s);
}

RunTrace run(const Graph& graph, const ShardedDataset& input, const RunConfig& config, const RoundObserver& observer) {
    config.validate();
    require(graph.size() == input.user_count(), ErrorKind::DimensionMismatch,
            "graph has " + std::to_string(graph.size()) + " vertices, data has " +
                std::to_string(input.user_count()) + " users");
    if (config.loss.metric.kind() == MetricKind::mahalanobis)
        require(config.loss.metric.dim() == input.dim, ErrorKind::DimensionMismatch, "metric dimension mismatch");

    ShardedDataset scaled;
    const ShardedDataset* data = &input;
    if (config.weights == WeightConvention::unit) {
        scaled = input.with_weight_scale(static_cast<double>(input.total_points()) / input.total_weight());
        data = &scaled;
    }
    const ShardedDataset& shards = *data;
    const simd::KernelTable& kt = simd::kernels_for(config.kernels);
    const LossSpec& loss = config.loss;

    std::optional<WorkerPool> pool;
    if (config.mode == ExecutionMode::parallel) {
        std::size_t n = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
        pool.emplace(std::min(n, std::max<std::size_t>(shards.user_count(), 1)));
    }
    WorkerPool* p = pool ? &*pool : nullptr;

    RunTrace trace;
    trace.kernel = std::string(kt.name);
    const double lam = graph.lambda_max();
    trace.alpha_used = compute_step_size(config.alpha.rule, cost_smoothness(loss, shards), config.rho, lam,
                                         shards.user_count(), shards.max_shard_size(), config.alpha.value);
    trace.initial = initialize_centers(shards, config);

    CenterState x = trace.initial;
    Clustering previous;
    std::size_t quiet = 0;
    trace.rounds.reserve(config.T);
    for (std::size_t t = 0; t < config.T; ++t) {
        Clustering c = assign_clusters(x, shards, loss.metric, kt, p);
        try {
            x = center_round(x, c, graph, shards, loss, config.rho, trace.alpha_used, config.B, kt, p);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NonFiniteState) throw;
            trace.aborted = true;
            trace.abort_reason = "round " + std::to_string(t + 1) + ": " + e.what();
            trace.final_clustering = std::move(c);
            trace.final_state = x;
            return trace;
        }

        RoundRecord rec;
        rec.round = t + 1;
        rec.J = cost_J(x, c, shards, loss);
        rec.J_rho = cost_J_rho(x, c, shards, graph, loss, config.rho);
        rec.consensus_gap = consensus_gap(x);
        rec.fixed_point_residual = fixed_point_residual(x, c, shards, graph, loss, config.rho, kt);
        if (t == 0) {
            rec.cluster_changes = c.total_points();
        } else {
            for (std::size_t i = 0; i < c.assignment.size(); ++i)
                for (std::size_t r = 0; r < c.assignment[i].size(); ++r)
                    rec.cluster_changes += c.assignment[i][r] != previous.assignment[i][r];
        }
        trace.rounds.push_back(rec);
        if (observer) observer(rec, x, c);
        previous = std::move(c);

        if (config.early_stop_tolerance > 0.0) {
            bool ok = rec.consensus_gap < config.early_stop_tolerance &&
                      rec.fixed_point_residual < config.early_stop_tolerance;
            quiet = ok ? quiet + 1 : 0;
            if (quiet >= config.early_stop_window) break;
        }
    }
    trace.final_state = std::move(x);
    trace.final_clustering = std::move(previous);
    return trace;
}

RunTrace run_centralized(const LabeledDataset& dataset, const RunConfig& config, const RoundObserver& observer) {
    ShardedDataset shards = partition(dataset, 1, PartitionSpec{});
    RunConfig c = config;
    c.rho = 1.0;
    if (c.alpha.rule == StepRule::experimental) {
        c.alpha.rule = StepRule::explicit_value;
        c.alpha.value = 1.0 / (2.0 * static_cast<double>(dataset.size()));
    }
    return run(Graph::single_vertex(), shards, c, observer);
}

std::vector<RunTrace> run_local(const ShardedDataset& shards, const RunConfig& config) {
    if (config.init.scheme == InitScheme::explicit_centers && config.init.centers) {
        const CenterState& c = *config.init.centers;
        require(c.users() == shards.user_count(), ErrorKind::DimensionMismatch,
                "explicit centers must have one block per user");
    }
    std::vector<RunTrace> out;
    out.reserve(shards.user_count());
    for (std::size_t i = 0; i < shards.user_count(); ++i) {
        const LocalShard& s = shards.shards[i];
        LabeledDataset ds;
        ds.dim = shards.dim;
        ds.points = s.points;
        ds.labels = s.labels;
        ds.weights = s.weights;
        RunConfig c = config;
        if (c.init.scheme == InitScheme::explicit_centers && c.init.centers) {
            const CenterState& all = *config.init.centers;
            CenterState one(1, all.clusters(), all.dim());
            std::copy(all.user(i).begin(), all.user(i).end(), one.values().begin());
            c.init.centers = std::move(one);
        }
        out.push_back(run_centralized(ds, c));
    }
    return out;
}

std::vector<double> lloyd_oracle(std::span<const double> points, std::span<const double> weights, std::size_t dim,
                                 std::span<const unsigned> assignment, std::size_t clusters,
                                 std::optional<std::span<const double>> previous) {
    const std::size_t n = weights.size();
    require(points.size() == n * dim && assignment.size() == n, ErrorKind::DimensionMismatch,
            "points, weights and assignment disagree");
    if (previous)
        require(previous->size() == clusters * dim, ErrorKind::DimensionMismatch, "previous centers must be K x d");
    std::vector<double> sum(clusters * dim, 0.0), mass(clusters, 0.0), global(dim, 0.0);
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        std::size_t k = assignment[r];
        require(k < clusters, ErrorKind::DimensionMismatch, "cluster index out of range");
        mass[k] += weights[r];
        total += weights[r];
        for (std::size_t t = 0; t < dim; ++t) {
            sum[k * dim + t] += weights[r] * points[r * dim + t];
            global[t] += weights[r] * points[r * dim + t];
        }
    }
    for (std::size_t k = 0; k < clusters; ++k)
        for (std::size_t t = 0; t < dim; ++t) {
            double& v = sum[k * dim + t];
            if (mass[k] > 0.0)
                v /= mass[k];
            else
                v = previous ? (*previous)[k * dim + t] : (total > 0.0 ? global[t] / total : 0.0);
        }
    return sum;
}

std::vector<double> lloyd_oracle(const ShardedDataset& shards, const Clustering& clustering,
                                 std::optional<std::span<const double>> previous) {
    require(clustering.assignment.size() == shards.user_count(), ErrorKind::DimensionMismatch,
            "clustering does not match data");
    std::vector<double> points, weights;
    std::vector<unsigned> assignment;
    for (std::size_t i = 0; i < shards.user_count(); ++i) {
        const LocalShard& s = shards.shards[i];
        require(clustering.assignment[i].size() == s.size(), ErrorKind::DimensionMismatch,
                "clustering does not match data");
        points.insert(points.end(), s.points.begin(), s.points.end());
        weights.insert(weights.end(), s.weights.begin(), s.weights.end());
        assignment.insert(assignment.end(), clustering.assignment[i].begin(), clustering.assignment[i].end());
    }
    return lloyd_oracle(points, weights, shards.dim, assignment, clustering.clusters, previous);
}

std::size_t stability_round(const RunTrace& trace) noexcept {
    std::size_t n = trace.rounds.size();
    std::size_t r = n;
    while (r > 0 && trace.rounds[r - 1].cluster_changes == 0) --r;
    // rounds[r..n) are all quiet; stability is reached after round r.
    return r + 1;
}

}  // namespace dgc
