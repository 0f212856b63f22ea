#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "dgc/closed_form.hpp"
#include "dgc/data.hpp"
#include "dgc/engine.hpp"
#include "dgc/error.hpp"
#include "dgc/experiment.hpp"
#include "dgc/graph.hpp"
#include "dgc/rng.hpp"

using namespace dgc;
using V = std::vector<double>;

namespace {

Graph make_graph(TopologyKind kind, std::size_t m) {
    TopologySpec s;
    s.kind = kind;
    s.m = m;
    return build_graph(s);
}

LossSpec make_loss(LossKind kind, double delta = 5.0, double eta = 1.0) {
    LossSpec l;
    l.kind = kind;
    l.delta = delta;
    l.eta = eta;
    return l;
}

// Shards built directly from per-user lists of 1-d or d-dim points.
ShardedDataset shards_of(std::size_t d, const std::vector<V>& points, const std::vector<V>& weights) {
    ShardedDataset sh;
    sh.dim = d;
    std::size_t g = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        LocalShard s;
        s.dim = d;
        s.points = points[i];
        s.weights = weights[i];
        for (std::size_t r = 0; r < s.weights.size(); ++r) s.global_index.push_back(g++);
        s.rebuild_coords();
        sh.shards.push_back(std::move(s));
    }
    return sh;
}

CenterState state_of(std::size_t m, std::size_t K, std::size_t d, const V& values) {
    CenterState x(m, K, d);
    std::copy(values.begin(), values.end(), x.values().begin());
    return x;
}

LabeledDataset iris() { return load_csv(std::filesystem::path(DGC_DATA_DIR) / "iris.csv", 4); }

const LossKind kAll[] = {LossKind::kmeans, LossKind::huber, LossKind::logistic, LossKind::fair};

}  // namespace

TEST_CASE("step size rules") {
    CHECK(compute_step_size(StepRule::theorem1, 1.0, 1.0, 4.0, 10, 15) == doctest::Approx(0.198).epsilon(1e-15));
    // Ring of ten: spectrum 2 - 2 cos(2 pi j / 10), largest at j = 5.
    double lam = make_graph(TopologyKind::ring, 10).lambda_max();
    CHECK(lam == doctest::Approx(2.0 - 2.0 * std::cos(M_PI)).epsilon(1e-9));
    CHECK(compute_step_size(StepRule::experimental, 1.0, 10.0, lam, 10, 15) ==
          doctest::Approx(1.0 / (2.0 * 10 * 15 / 10.0 + 4.0 + 1.0)).epsilon(1e-9));
    double prev = 0.0;
    for (double rho = 1; rho < 1e9; rho *= 10) {
        double a = compute_step_size(StepRule::theorem1, 1.0, rho, 4.0, 1, 1);
        CHECK(a > prev);
        CHECK(a < 0.99 / 4.0);
        prev = a;
    }
    CHECK(prev == doctest::Approx(0.99 / 4.0).epsilon(1e-8));
    CHECK(compute_step_size(StepRule::explicit_value, 1, 1, 1, 1, 1, 0.3) == 0.3);
    CHECK_THROWS_AS(compute_step_size(StepRule::explicit_value, 1, 1, 1, 1, 1, 0.0), Error);
    CHECK_THROWS_AS(compute_step_size(StepRule::theorem1, 0.0, 1, 1, 1, 1), Error);
    CHECK_THROWS_AS(compute_step_size(StepRule::theorem1, 1.0, 0.5, 1, 1, 1), Error);
}

TEST_CASE("assignment examples") {
    auto sh = shards_of(1, {{1.0, 9.0}}, {{0.5, 0.5}});
    auto c = assign_clusters(state_of(1, 2, 1, {0.0, 10.0}), sh, MetricSpec::euclidean());
    CHECK(c.assignment[0] == std::vector<unsigned>{0, 1});

    auto tie = shards_of(1, {{5.0}}, {{1.0}});
    CHECK(assign_clusters(state_of(1, 2, 1, {0.0, 10.0}), tie, MetricSpec::euclidean()).assignment[0][0] == 0);

    auto one = assign_clusters(state_of(1, 1, 1, {3.0}), sh, MetricSpec::euclidean());
    CHECK(one.assignment[0] == std::vector<unsigned>{0, 0});

    CHECK_THROWS_AS(assign_clusters(state_of(1, 1, 2, {0, 0}), sh, MetricSpec::euclidean()), Error);
}

TEST_CASE("mahalanobis assignment uses the metric") {
    // A stretches the first axis: (2,0) is farther than (0,3) from the origin.
    auto sh = shards_of(2, {{0.0, 0.0}}, {{1.0}});
    auto metric = MetricSpec::mahalanobis({9.0, 0.0, 0.0, 1.0}, 2);
    auto c = assign_clusters(state_of(1, 2, 2, {2.0, 0.0, 0.0, 2.5}), sh, metric);
    CHECK(c.assignment[0][0] == 1);
    CHECK(assign_clusters(state_of(1, 2, 2, {2.0, 0.0, 0.0, 2.5}), sh, MetricSpec::euclidean()).assignment[0][0] == 0);
}

TEST_CASE("center round examples") {
    Graph single = Graph::single_vertex();
    auto sh = shards_of(1, {{2.0}}, {{1.0}});
    Clustering c{1, {{0}}};
    auto x = center_round(state_of(1, 1, 1, {0.0}), c, single, sh, make_loss(LossKind::kmeans), 1.0, 0.5, 1);
    CHECK(x.center(0, 0)[0] == 1.0);

    // Consensus state, every cluster empty.
    Graph ring = make_graph(TopologyKind::ring, 3);
    auto empty = shards_of(1, {{5.0}, {6.0}, {7.0}}, {{0.3}, {0.3}, {0.4}});
    CenterState same = state_of(3, 2, 1, {1.0, 2.0, 1.0, 2.0, 1.0, 2.0});
    Clustering none{2, {{1}, {1}, {1}}};
    // Cluster 0 is empty everywhere; cluster 1 holds the points, so compare only cluster 0.
    auto moved = center_round(same, none, ring, empty, make_loss(LossKind::kmeans), 10.0, 0.1, 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(moved.center(i, 0)[0] == 1.0);

    // Two users on a path, one point each, hand-evaluated update.
    Graph path = make_graph(TopologyKind::path, 2);
    auto two = shards_of(1, {{0.0}, {2.0}}, {{0.5}, {0.5}});
    auto next = center_round(state_of(2, 1, 1, {0.0, 2.0}), Clustering{1, {{0}, {0}}}, path, two,
                             make_loss(LossKind::kmeans), 1.0, 0.1, 1);
    CHECK(next.center(0, 0)[0] == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(next.center(1, 0)[0] == doctest::Approx(1.8).epsilon(1e-15));
}

TEST_CASE("one sub-round equals the closed-form updates") {
    CounterRng rng(13, "test.closed_form");
    for (LossKind kind : kAll) {
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t m = 4, K = 2, d = 1 + rng.below(4);
            LossSpec loss = make_loss(kind, 0.2 + rng.uniform(), 0.3 + 2 * rng.uniform());
            std::vector<V> pts(m), ws(m);
            for (std::size_t i = 0; i < m; ++i) {
                std::size_t n = 1 + rng.below(6);
                for (std::size_t r = 0; r < n * d; ++r) pts[i].push_back(rng.normal(0.0, 2.0));
                for (std::size_t r = 0; r < n; ++r) ws[i].push_back(0.01 + rng.uniform());
            }
            auto sh = shards_of(d, pts, ws);
            Graph g = make_graph(TopologyKind::ring, m);
            CenterState x(m, K, d);
            for (double& v : x.values()) v = rng.normal();
            Clustering c;
            c.clusters = K;
            for (std::size_t i = 0; i < m; ++i) {
                c.assignment.emplace_back();
                for (std::size_t r = 0; r < sh.shards[i].size(); ++r)
                    c.assignment[i].push_back(static_cast<unsigned>(rng.below(K)));
            }
            double alpha = 0.01 + 0.1 * rng.uniform(), rho = 1.0 + 10 * rng.uniform();
            auto next = center_round(x, c, g, sh, loss, rho, alpha, 1);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t k = 0; k < K; ++k) {
                    V p, w;
                    for (std::size_t r = 0; r < sh.shards[i].size(); ++r)
                        if (c.assignment[i][r] == k) {
                            auto pt = sh.shards[i].point(r);
                            p.insert(p.end(), pt.begin(), pt.end());
                            w.push_back(sh.shards[i].weights[r]);
                        }
                    closed_form::LocalUpdate in;
                    in.center = x.center(i, k);
                    for (std::size_t j : g.neighbors(i)) in.neighbor_centers.push_back(x.center(j, k));
                    in.points = p;
                    in.weights = w;
                    in.alpha = alpha;
                    in.rho = rho;
                    auto expect = closed_form::update(loss, in);
                    for (std::size_t t = 0; t < d; ++t)
                        worst = std::max(worst, std::abs(expect[t] - next.center(i, k)[t]));
                }
        }
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("cost examples") {
    auto sh = shards_of(1, {{0.0, 2.0}}, {{0.5, 0.5}});
    Clustering c{1, {{0, 0}}};
    CHECK(cost_J(state_of(1, 1, 1, {1.0}), c, sh, make_loss(LossKind::kmeans)) == 0.5);

    auto sh2 = shards_of(1, {{0.0, 2.0}}, {{0.5, 0.5}});
    Clustering own{2, {{0, 1}}};
    CHECK(cost_J(state_of(1, 2, 1, {0.0, 2.0}), own, sh2, make_loss(LossKind::kmeans)) == 0.0);
    CHECK(cost_J(state_of(1, 2, 1, {0.0, 2.0}), own, sh2, make_loss(LossKind::fair)) == 0.0);

    // Consensus state: J_rho = J / rho.
    Graph ring = make_graph(TopologyKind::ring, 3);
    auto three = shards_of(1, {{0.0}, {1.0}, {3.0}}, {{0.2}, {0.3}, {0.5}});
    Clustering all{1, {{0}, {0}, {0}}};
    auto x = state_of(3, 1, 1, {0.7, 0.7, 0.7});
    auto loss = make_loss(LossKind::huber, 1.0);
    CHECK(cost_J_rho(x, all, three, ring, loss, 4.0) == cost_J(x, all, three, loss) / 4.0);

    // Path of two, x = (0, 2), clusters empty in the sense that no point is near: use K=2 with points in cluster 1.
    Graph path = make_graph(TopologyKind::path, 2);
    auto far = shards_of(1, {{0.0}, {0.0}}, {{0.5}, {0.5}});
    Clustering other{2, {{1}, {1}}};
    auto xp = state_of(2, 2, 1, {0.0, 0.0, 2.0, 0.0});
    CHECK(cost_J_rho(xp, other, far, path, make_loss(LossKind::kmeans), 1.0) == 2.0);
    // As rho grows the penalty dominates.
    CHECK(cost_J_rho(xp, other, far, path, make_loss(LossKind::kmeans), 1e12) == doctest::Approx(2.0));
}

TEST_CASE("consensus gap examples") {
    CHECK(consensus_gap(state_of(3, 1, 2, {1, 2, 1, 2, 1, 2})) == 0.0);
    CHECK(consensus_gap(state_of(2, 1, 2, {0, 0, 3, 0})) == 3.0);
    double a = 1.0, b = 2.5;  // three users on a line with gaps 1, 1.5 and 2.5
    CHECK(consensus_gap(state_of(3, 1, 1, {0.0, a, b})) == 2.5);
    // Stacked over clusters.
    CHECK(consensus_gap(state_of(2, 2, 1, {0, 0, 3, 4})) == 5.0);
}

TEST_CASE("fixed point residual") {
    auto sh = shards_of(1, {{0.0, 1.0, 5.0}}, {{0.2, 0.3, 0.5}});
    Clustering c{1, {{0, 0, 0}}};
    double mean = 0.2 * 0.0 + 0.3 * 1.0 + 0.5 * 5.0;
    CHECK(fixed_point_residual(state_of(1, 1, 1, {mean}), c, sh, Graph::single_vertex(), make_loss(LossKind::kmeans),
                               1.0) <= 1e-12);

    // Users 0 and 1 differ on a cluster that is empty for both: only consensus remains.
    Graph path = make_graph(TopologyKind::path, 2);
    auto two = shards_of(1, {{0.0}, {0.0}}, {{0.5}, {0.5}});
    Clustering cl{2, {{0}, {0}}};
    auto x = state_of(2, 2, 1, {0.0, 1.0, 0.0, 4.0});
    double r = fixed_point_residual(x, cl, two, path, make_loss(LossKind::kmeans), 1.0);
    CHECK(r == doctest::Approx(std::sqrt(9.0 + 9.0)).epsilon(1e-15));

    // Consensus at the Lloyd point on a complete graph: residual is grad J / rho.
    Graph k3 = make_graph(TopologyKind::complete, 3);
    auto three = shards_of(1, {{0.0, 4.0}, {1.0}, {2.0}}, {{0.25, 0.25}, {0.25}, {0.25}});
    Clustering one{1, {{0, 0}, {0}, {0}}};
    auto lloyd = lloyd_oracle(three, one);
    CHECK(lloyd[0] == 1.75);
    auto at = state_of(3, 1, 1, {1.75, 1.75, 1.75});
    double r1 = fixed_point_residual(at, one, three, k3, make_loss(LossKind::kmeans), 1.0);
    double r100 = fixed_point_residual(at, one, three, k3, make_loss(LossKind::kmeans), 100.0);
    // Local gradients: user 0: 0.25*(1.75) + 0.25*(-2.25) = -0.125, user 1: 0.1875, user 2: -0.0625
    CHECK(r1 == doctest::Approx(std::sqrt(0.125 * 0.125 + 0.1875 * 0.1875 + 0.0625 * 0.0625)).epsilon(1e-14));
    CHECK(r100 == doctest::Approx(r1 / 100.0).epsilon(1e-12));
}

TEST_CASE("lloyd oracle examples") {
    std::vector<unsigned> a{0, 0};
    CHECK(lloyd_oracle(V{0.0, 2.0}, V{0.5, 0.5}, 1, a, 1) == V{1.0});
    CHECK(lloyd_oracle(V{0.0, 4.0}, V{0.75, 0.25}, 1, a, 1) == V{1.0});
    std::vector<unsigned> s{0};
    CHECK(lloyd_oracle(V{3.0, -1.0}, V{1.0}, 2, s, 1) == V{3.0, -1.0});
    // An empty cluster keeps its previous center, or gets the global mean.
    V prev{9.0, 8.0};
    CHECK(lloyd_oracle(V{0.0, 2.0}, V{0.5, 0.5}, 1, a, 2, std::span<const double>(prev)) == V{1.0, 8.0});
    CHECK(lloyd_oracle(V{0.0, 2.0}, V{0.5, 0.5}, 1, a, 2) == V{1.0, 1.0});
}

TEST_CASE("run validates its configuration") {
    Graph path = make_graph(TopologyKind::path, 2);
    auto sh = shards_of(1, {{0.0, 1.0}, {2.0, 3.0}}, {{0.25, 0.25}, {0.25, 0.25}});
    RunConfig c;
    c.K = 2;
    c.T = 0;
    CHECK_THROWS_AS(run(path, sh, c), Error);
    c.T = 5;
    c.rho = 0.5;
    CHECK_THROWS_AS(run(path, sh, c), Error);
    c.rho = 1.0;
    CHECK_THROWS_AS(run(make_graph(TopologyKind::path, 3), sh, c), Error);
    c.alpha = {StepRule::explicit_value, -1.0};
    CHECK_THROWS_AS(run(path, sh, c), Error);
}

TEST_CASE("single-cluster consensus on a complete graph") {
    auto data = generate_gaussian_mixture(1, 24, V{2.0, -1.0}, 2, 1.0, 4);
    auto sh = partition(data, 4, {PartitionScheme::random, 1, 1, 1});
    RunConfig c;
    c.K = 1;
    c.T = 5000;
    c.rho = 1.0;
    c.seed = 3;
    auto trace = run(make_graph(TopologyKind::complete, 4), sh, c);
    CHECK(trace.rounds.back().fixed_point_residual < 1e-6);
    CHECK(trace.rounds.back().consensus_gap < trace.rounds.front().consensus_gap);
}

TEST_CASE("iris consensus gap at rho 1000") {
    auto ds = iris();
    auto sh = partition(ds, 10, {PartitionScheme::homogeneous, 1, 1, 0});
    RunConfig c;
    c.K = 3;
    c.T = 500;
    c.rho = 1000;
    c.alpha.rule = StepRule::experimental;
    c.init.scheme = InitScheme::warm_start_per_class;
    c.weights = WeightConvention::unit;
    auto trace = run(make_graph(TopologyKind::ring, 10), sh, c);
    double gap = trace.rounds.back().consensus_gap;
    CHECK(gap <= 3 * 5e-3);
    CHECK(gap >= 5e-3 / 3);
}

TEST_CASE("warm start picks one local point of each class") {
    auto ds = iris();
    auto sh = partition(ds, 10, {PartitionScheme::homogeneous, 1, 1, 0});
    RunConfig c;
    c.K = 3;
    c.init.scheme = InitScheme::warm_start_per_class;
    auto x = initialize_centers(sh, c);
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t k = 0; k < 3; ++k) {
            const auto& s = sh.shards[i];
            bool found = false;
            for (std::size_t r = 0; r < s.size(); ++r)
                if (s.labels[r] == static_cast<int>(k) && std::equal(s.point(r).begin(), s.point(r).end(), x.center(i, k).begin()))
                    found = true;
            CHECK(found);
        }
    c.K = 2;
    CHECK_THROWS_AS(initialize_centers(sh, c), Error);
}

TEST_CASE("random init falls back to replacement for tiny shards") {
    auto sh = shards_of(1, {{1.0}, {2.0, 3.0, 4.0}}, {{0.25}, {0.25, 0.25, 0.25}});
    RunConfig c;
    c.K = 3;
    auto x = initialize_centers(sh, c);
    for (std::size_t k = 0; k < 3; ++k) CHECK(x.center(0, k)[0] == 1.0);
    V second{x.center(1, 0)[0], x.center(1, 1)[0], x.center(1, 2)[0]};
    std::sort(second.begin(), second.end());
    CHECK(second == V{2.0, 3.0, 4.0});
}

TEST_CASE("shared init gives every user the same distinct data points") {
    auto sh = shards_of(1, {{1.0}, {2.0, 3.0, 4.0}}, {{0.25}, {0.25, 0.25, 0.25}});
    RunConfig c;
    c.K = 3;
    c.seed = 4;
    c.init.scheme = InitScheme::random_shared_sample;
    auto x = initialize_centers(sh, c);
    V first{x.center(0, 0)[0], x.center(0, 1)[0], x.center(0, 2)[0]};
    V second{x.center(1, 0)[0], x.center(1, 1)[0], x.center(1, 2)[0]};
    CHECK(first == second);
    std::sort(first.begin(), first.end());
    CHECK(std::adjacent_find(first.begin(), first.end()) == first.end());
    for (double v : first) CHECK((v == 1.0 || v == 2.0 || v == 3.0 || v == 4.0));
    c.K = 5;
    CHECK_THROWS_AS(initialize_centers(sh, c), Error);
    CHECK(parse_init_scheme(to_string(InitScheme::random_shared_sample)) == InitScheme::random_shared_sample);
}

TEST_CASE("explicit init is validated") {
    auto sh = shards_of(1, {{1.0}, {2.0}}, {{0.5}, {0.5}});
    RunConfig c;
    c.K = 1;
    c.init.scheme = InitScheme::explicit_centers;
    c.init.centers = state_of(2, 1, 1, {5.0, 6.0});
    CHECK(initialize_centers(sh, c) == state_of(2, 1, 1, {5.0, 6.0}));
    c.init.centers = CenterState(3, 1, 1);
    CHECK_THROWS_AS(initialize_centers(sh, c), Error);
}

TEST_CASE("centralized run is the one-vertex run") {
    auto ds = iris();
    RunConfig c;
    c.K = 3;
    c.T = 50;
    c.seed = 7;
    auto a = run_centralized(ds, c);
    auto b = run(Graph::single_vertex(), partition(ds, 1, {}), c);
    CHECK(trace_csv(a) == trace_csv(b));
    CHECK(a.final_state == b.final_state);
    for (std::size_t t = 1; t < a.rounds.size(); ++t) CHECK(a.rounds[t].J_rho <= a.rounds[t - 1].J_rho + 1e-12);

    c.alpha.rule = StepRule::experimental;
    CHECK(run_centralized(ds, c).alpha_used == 1.0 / 300.0);
}

TEST_CASE("many inner steps reach the lloyd point") {
    auto data = generate_gaussian_mixture(2, 20, V{-3.0, 0.0, 3.0, 0.0}, 2, 1.0, 5);
    RunConfig c;
    c.K = 2;
    c.B = 200;
    c.T = 1;
    c.seed = 2;
    auto trace = run_centralized(data, c);
    auto sh = partition(data, 1, {});
    auto mean = lloyd_oracle(sh, trace.final_clustering);
    // With normalized weights one inner step contracts the error by 1 - alpha W = 0.01.
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t t = 0; t < 2; ++t) CHECK(std::abs(trace.final_state.center(0, k)[t] - mean[k * 2 + t]) < 1e-6);
}

TEST_CASE("local runs are independent per user") {
    auto ds = iris();
    auto sh = partition(ds, 4, {PartitionScheme::random, 1, 1, 0});
    RunConfig c;
    c.K = 3;
    c.T = 30;
    auto traces = run_local(sh, c);
    REQUIRE(traces.size() == 4);
    ShardedDataset swapped = sh;
    std::swap(swapped.shards[0], swapped.shards[3]);
    auto back = run_local(swapped, c);
    CHECK(trace_csv(traces[0]) == trace_csv(back[3]));
    CHECK(trace_csv(traces[3]) == trace_csv(back[0]));
    CHECK(trace_csv(traces[1]) == trace_csv(back[1]));

    auto whole = partition(ds, 1, {});
    CHECK(trace_csv(run_local(whole, c)[0]) == trace_csv(run_centralized(ds, c)));
}

TEST_CASE("descent, hull and reassignment on iris") {
    auto ds = iris();
    auto sh = partition(ds, 10, {PartitionScheme::homogeneous, 1, 1, 0});
    Graph ring = make_graph(TopologyKind::ring, 10);
    for (LossKind kind : kAll)
        for (double rho : {1.0, 100.0})
            for (std::size_t B : {std::size_t{1}, std::size_t{5}}) {
                RunConfig c;
                c.K = 3;
                c.T = 60;
                c.rho = rho;
                c.B = B;
                c.loss = make_loss(kind);
                c.seed = 1;
                CenterState init = initialize_centers(sh, c);
                std::vector<double> lo(4, INFINITY), hi(4, -INFINITY);
                auto widen = [&](std::span<const double> p) {
                    for (std::size_t t = 0; t < 4; ++t) {
                        lo[t] = std::min(lo[t], p[t]);
                        hi[t] = std::max(hi[t], p[t]);
                    }
                };
                for (std::size_t r = 0; r < ds.size(); ++r) widen(ds.point(r));
                for (std::size_t i = 0; i < 10; ++i)
                    for (std::size_t k = 0; k < 3; ++k) widen(init.center(i, k));
                double prev = INFINITY;
                CenterState last = init;
                Clustering last_c;
                std::size_t descent = 0, hull = 0, reassign = 0, optimal = 0;
                run(ring, sh, c, [&](const RoundRecord& rec, const CenterState& x, const Clustering& cl) {
                    if (rec.J_rho > prev + 1e-9) ++descent;
                    prev = rec.J_rho;
                    for (std::size_t i = 0; i < 10; ++i)
                        for (std::size_t k = 0; k < 3; ++k)
                            for (std::size_t t = 0; t < 4; ++t) {
                                double v = x.center(i, k)[t];
                                if (v < lo[t] - 1e-9 || v > hi[t] + 1e-9) ++hull;
                            }
                    // The round's clustering was computed from the previous centers.
                    if (!last_c.assignment.empty() &&
                        cost_J(last, cl, sh, c.loss) > cost_J(last, last_c, sh, c.loss) + 1e-12)
                        ++reassign;
                    for (std::size_t i = 0; i < 10; ++i)
                        for (std::size_t r = 0; r < sh.shards[i].size(); ++r)
                            for (std::size_t k = 0; k < 3; ++k)
                                if (distance(c.loss.metric, last.center(i, k), sh.shards[i].point(r)) <
                                    distance(c.loss.metric, last.center(i, cl.assignment[i][r]), sh.shards[i].point(r)))
                                    ++optimal;
                    last = x;
                    last_c = cl;
                });
                CHECK(descent == 0);
                CHECK(hull == 0);
                CHECK(reassign == 0);
                CHECK(optimal == 0);
            }
}

TEST_CASE("empty cluster moves by consensus only") {
    Graph path = make_graph(TopologyKind::path, 3);
    auto sh = shards_of(1, {{0.0, 1.0}, {2.0}, {3.0}}, {{0.25, 0.25}, {0.25}, {0.25}});
    // Cluster 1 is empty at user 1 only.
    Clustering cl{2, {{0, 1}, {0}, {1}}};
    auto x = state_of(3, 2, 1, {0.0, 1.0, 2.0, 5.0, 3.0, 3.0});
    const double alpha = 0.1, rho = 2.0;
    auto next = center_round(x, cl, path, sh, make_loss(LossKind::kmeans), rho, alpha, 1);
    // Neighbours of user 1 are users 0 and 2: consensus (5-1)+(5-3) = 6.
    CHECK(next.center(1, 1)[0] == doctest::Approx(5.0 - alpha * 6.0).epsilon(1e-15));
}

TEST_CASE("determinism and parallel equality") {
    auto ds = iris();
    auto sh = partition(ds, 10, {PartitionScheme::homogeneous, 1, 1, 0});
    Graph ring = make_graph(TopologyKind::ring, 10);
    RunConfig c;
    c.K = 3;
    c.T = 100;
    c.rho = 10;
    c.loss = make_loss(LossKind::logistic);
    auto a = run(ring, sh, c);
    auto b = run(ring, sh, c);
    CHECK(trace_csv(a) == trace_csv(b));
    CHECK(a.final_state == b.final_state);
    c.mode = ExecutionMode::parallel;
    c.threads = 4;
    auto p = run(ring, sh, c);
    for (std::size_t t = 0; t < a.rounds.size(); ++t) {
        CHECK(std::abs(a.rounds[t].J_rho - p.rounds[t].J_rho) <= 1e-12);
        CHECK(std::abs(a.rounds[t].fixed_point_residual - p.rounds[t].fixed_point_residual) <= 1e-12);
        CHECK(a.rounds[t].cluster_changes == p.rounds[t].cluster_changes);
    }
    for (std::size_t i = 0; i < a.final_state.values().size(); ++i)
        CHECK(std::abs(a.final_state.values()[i] - p.final_state.values()[i]) <= 1e-12);
}

TEST_CASE("first round counts every point as changed") {
    auto ds = iris();
    RunConfig c;
    c.K = 3;
    c.T = 3;
    auto t = run_centralized(ds, c);
    CHECK(t.rounds[0].cluster_changes == 150);
    CHECK(t.rounds[0].round == 1);
}

TEST_CASE("a divergent step aborts with a partial trace") {
    auto ds = iris();
    auto sh = partition(ds, 3, {PartitionScheme::random, 1, 1, 0});
    RunConfig c;
    c.K = 3;
    c.T = 1000;
    c.alpha = {StepRule::explicit_value, 50.0};
    auto t = run(make_graph(TopologyKind::ring, 3), sh, c);
    CHECK(t.aborted);
    CHECK(t.rounds.size() < 1000);
    CHECK(t.abort_reason.find("NonFiniteState") != std::string::npos);
}

TEST_CASE("early stopping") {
    // Identical local means make consensus exact at the fixed point.
    auto sh = shards_of(1, {{0.0, 2.0}, {0.5, 1.5}, {1.0}, {-1.0, 3.0}}, {{0.1, 0.1}, {0.1, 0.1}, {0.2}, {0.2, 0.2}});
    RunConfig c;
    c.K = 1;
    c.T = 5000;
    c.early_stop_tolerance = 1e-4;
    auto t = run(make_graph(TopologyKind::complete, 4), sh, c);
    CHECK(t.rounds.size() < 5000);
    for (std::size_t r = t.rounds.size() - 10; r < t.rounds.size(); ++r) {
        CHECK(t.rounds[r].consensus_gap < 1e-4);
        CHECK(t.rounds[r].fixed_point_residual < 1e-4);
    }
}

TEST_CASE("stability round") {
    RunTrace t;
    for (std::size_t c : {5, 2, 0, 1, 0, 0}) t.rounds.push_back({t.rounds.size() + 1, 0, 0, 0, 0, c});
    CHECK(stability_round(t) == 5);
    t.rounds.back().cluster_changes = 3;
    CHECK(stability_round(t) == 7);
}

TEST_CASE("unit weights scale the cost but not the clustering rule") {
    auto ds = iris();
    auto sh = partition(ds, 2, {PartitionScheme::random, 1, 1, 0});
    Graph g = make_graph(TopologyKind::path, 2);
    RunConfig c;
    c.K = 3;
    c.T = 1;
    c.alpha = {StepRule::explicit_value, 1e-3};
    auto n = run(g, sh, c);
    c.weights = WeightConvention::unit;
    auto u = run(g, sh, c);
    CHECK(u.rounds[0].cluster_changes == n.rounds[0].cluster_changes);
    CHECK(u.initial == n.initial);
    CHECK(cost_smoothness(c.loss, sh.with_weight_scale(150.0)) == doctest::Approx(75.0));
    CHECK(cost_smoothness(c.loss, sh) == 1.0);
}
