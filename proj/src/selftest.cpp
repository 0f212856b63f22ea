#include "dgc/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dgc/closed_form.hpp"
#include "dgc/data.hpp"
#include "dgc/engine.hpp"
#include "dgc/error.hpp"
#include "dgc/experiment.hpp"
#include "dgc/graph.hpp"
#include "dgc/metrics.hpp"
#include "dgc/rng.hpp"

namespace dgc {

namespace {

struct Fixture {
    LabeledDataset data;
    ShardedDataset shards;
    Graph graph;
};

Graph make_graph(TopologyKind kind, std::size_t m) {
    TopologySpec s;
    s.kind = kind;
    s.m = m;
    return build_graph(s);
}

Fixture fixture() {
    const std::vector<double> means = {0.0, 0.0, 4.0, 0.0, 0.0, 4.0};
    Fixture f{generate_gaussian_mixture(3, 30, means, 2, 0.5, 11), {}, make_graph(TopologyKind::ring, 4)};
    f.shards = partition(f.data, 4, {PartitionScheme::random, 1, 1, 5});
    return f;
}

LossSpec loss_of(LossKind kind) {
    LossSpec l;
    l.kind = kind;
    return l;
}

std::string num(double v) { return format_number(v); }

CheckResult descent_and_hull(const Fixture& f) {
    std::size_t violations = 0, hull = 0;
    std::vector<double> lo(f.data.dim, INFINITY), hi(f.data.dim, -INFINITY);
    for (std::size_t r = 0; r < f.data.size(); ++r)
        for (std::size_t t = 0; t < f.data.dim; ++t) {
            lo[t] = std::min(lo[t], f.data.point(r)[t]);
            hi[t] = std::max(hi[t], f.data.point(r)[t]);
        }
    for (LossKind kind : {LossKind::kmeans, LossKind::huber, LossKind::logistic, LossKind::fair}) {
        RunConfig c;
        c.K = 3;
        c.T = 60;
        c.rho = 10;
        c.loss = loss_of(kind);
        c.seed = 3;
        // Initial centers are data points, so the data box already covers x0.
        double prev = INFINITY;
        run(f.graph, f.shards, c, [&](const RoundRecord& rec, const CenterState& x, const Clustering&) {
            if (rec.J_rho > prev + 1e-9) ++violations;
            prev = rec.J_rho;
            for (std::size_t i = 0; i < x.users(); ++i)
                for (std::size_t k = 0; k < x.clusters(); ++k)
                    for (std::size_t t = 0; t < x.dim(); ++t) {
                        double v = x.center(i, k)[t];
                        if (v < lo[t] - 1e-9 || v > hi[t] + 1e-9) ++hull;
                    }
        });
    }
    return {"descent and hull containment", violations == 0 && hull == 0,
            std::to_string(violations) + " descent violations, " + std::to_string(hull) + " hull violations"};
}

CheckResult assignment_optimality(const Fixture& f) {
    RunConfig c;
    c.K = 3;
    c.seed = 9;
    CenterState x = initialize_centers(f.shards, c);
    Clustering cl = assign_clusters(x, f.shards, MetricSpec::euclidean());
    std::size_t bad = 0;
    for (std::size_t i = 0; i < f.shards.user_count(); ++i)
        for (std::size_t r = 0; r < f.shards.shards[i].size(); ++r) {
            double own = distance(MetricSpec::euclidean(), x.center(i, cl.assignment[i][r]), f.shards.shards[i].point(r));
            for (std::size_t k = 0; k < 3; ++k)
                if (distance(MetricSpec::euclidean(), x.center(i, k), f.shards.shards[i].point(r)) < own) ++bad;
        }
    return {"assignment optimality", bad == 0, std::to_string(bad) + " suboptimal assignments"};
}

CheckResult closed_form_equivalence() {
    double worst = 0.0;
    CounterRng rng(42, stream_id("selftest.closed_form"));
    for (LossKind kind : {LossKind::kmeans, LossKind::huber, LossKind::logistic, LossKind::fair}) {
        LossSpec loss = loss_of(kind);
        loss.delta = 1.0;
        for (int trial = 0; trial < 20; ++trial) {
            const std::size_t d = 3, n = 5;
            ShardedDataset shards;
            shards.dim = d;
            shards.shards.resize(3);
            for (auto& s : shards.shards) {
                s.dim = d;
                for (std::size_t r = 0; r < n; ++r) {
                    for (std::size_t t = 0; t < d; ++t) s.points.push_back(rng.normal(0.0, 2.0));
                    s.weights.push_back(0.05 + rng.uniform());
                }
                s.rebuild_coords();
            }
            Graph g = make_graph(TopologyKind::path, 3);
            CenterState x(3, 1, d);
            for (double& v : x.values()) v = rng.normal();
            Clustering cl{1, std::vector<std::vector<unsigned>>(3, std::vector<unsigned>(n, 0))};
            const double alpha = 0.05, rho = 3.0;
            CenterState next = center_round(x, cl, g, shards, loss, rho, alpha, 1);
            for (std::size_t i = 0; i < 3; ++i) {
                closed_form::LocalUpdate in;
                in.center = x.center(i, 0);
                for (std::size_t j : g.neighbors(i)) in.neighbor_centers.push_back(x.center(j, 0));
                in.points = shards.shards[i].points;
                in.weights = shards.shards[i].weights;
                in.alpha = alpha;
                in.rho = rho;
                auto expect = closed_form::update(loss, in);
                for (std::size_t t = 0; t < d; ++t) worst = std::max(worst, std::abs(expect[t] - next.center(i, 0)[t]));
            }
        }
    }
    return {"closed-form equivalence", worst <= 1e-10, "max error " + num(worst)};
}

CheckResult determinism(const Fixture& f) {
    RunConfig c;
    c.K = 3;
    c.T = 40;
    c.rho = 10;
    c.seed = 1;
    std::string a = trace_csv(run(f.graph, f.shards, c));
    std::string b = trace_csv(run(f.graph, f.shards, c));
    c.mode = ExecutionMode::parallel;
    c.threads = 3;
    RunTrace p = run(f.graph, f.shards, c);
    c.mode = ExecutionMode::sequential;
    RunTrace s = run(f.graph, f.shards, c);
    double worst = 0.0;
    for (std::size_t t = 0; t < s.rounds.size(); ++t) {
        worst = std::max(worst, std::abs(s.rounds[t].J_rho - p.rounds[t].J_rho));
        worst = std::max(worst, std::abs(s.rounds[t].consensus_gap - p.rounds[t].consensus_gap));
    }
    return {"determinism", a == b && worst <= 1e-12, "sequential identical: " + std::string(a == b ? "yes" : "no") +
                                                           ", parallel max diff " + num(worst)};
}

CheckResult accuracy_oracle() {
    CounterRng rng(7, stream_id("selftest.accuracy"));
    std::size_t bad = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = 1 + rng.below(5), n = 2 + rng.below(30);
        std::vector<int> a(n), b(n);
        for (auto& v : a) v = static_cast<int>(rng.below(k));
        for (auto& v : b) v = static_cast<int>(rng.below(k));
        std::vector<int> perm(k);
        std::iota(perm.begin(), perm.end(), 0);
        std::size_t best = 0;
        do {
            std::size_t hits = 0;
            for (std::size_t r = 0; r < n; ++r) hits += perm[static_cast<std::size_t>(b[r])] == a[r];
            best = std::max(best, hits);
        } while (std::next_permutation(perm.begin(), perm.end()));
        if (std::abs(permutation_accuracy(a, b) - static_cast<double>(best) / static_cast<double>(n)) > 1e-12) ++bad;
    }
    return {"permutation accuracy oracle", bad == 0, std::to_string(bad) + " mismatches"};
}

CheckResult kernel_equivalence(const Fixture& f) {
    const simd::KernelTable* v = simd::avx2_kernels();
    if (!v) return {"kernel equivalence", true, "no vector kernels on this machine"};
    RunConfig c;
    c.K = 3;
    c.T = 30;
    c.seed = 2;
    c.loss = loss_of(LossKind::huber);
    c.kernels = simd::Isa::scalar;
    std::string a = trace_csv(run(f.graph, f.shards, c));
    c.kernels = simd::Isa::avx2;
    std::string b = trace_csv(run(f.graph, f.shards, c));
    return {"kernel equivalence", a == b, a == b ? "scalar and avx2 traces identical" : "traces differ"};
}

}  // namespace

std::vector<CheckResult> run_selftest() {
    std::vector<CheckResult> out;
    auto guard = [&](auto&& fn, const char* name) {
        try {
            out.push_back(fn());
        } catch (const std::exception& e) {
            out.push_back({name, false, e.what()});
        }
    };
    Fixture f = fixture();
    guard([&] { return descent_and_hull(f); }, "descent and hull containment");
    guard([&] { return assignment_optimality(f); }, "assignment optimality");
    guard([] { return closed_form_equivalence(); }, "closed-form equivalence");
    guard([&] { return determinism(f); }, "determinism");
    guard([] { return accuracy_oracle(); }, "permutation accuracy oracle");
    guard([&] { return kernel_equivalence(f); }, "kernel equivalence");
    return out;
}

}  // namespace dgc
