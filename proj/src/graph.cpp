#include "dgc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>
#include <string>

#include "dgc/error.hpp"
#include "dgc/rng.hpp"

namespace dgc {

std::string_view to_string(TopologyKind kind) noexcept {
    switch (kind) {
        case TopologyKind::ring: return "ring";
        case TopologyKind::complete: return "complete";
        case TopologyKind::star: return "star";
        case TopologyKind::path: return "path";
        case TopologyKind::erdos_renyi: return "erdos_renyi";
        case TopologyKind::custom: return "custom";
    }
    return "unknown";
}

TopologyKind parse_topology_kind(std::string_view name) {
    for (auto kind : {TopologyKind::ring, TopologyKind::complete, TopologyKind::star, TopologyKind::path,
                      TopologyKind::erdos_renyi, TopologyKind::custom}) {
        if (name == to_string(kind)) return kind;
    }
    fail(ErrorKind::InvalidSpec, "unknown topology kind '" + std::string(name) + "'");
}

namespace {

bool is_connected(const std::vector<std::vector<std::size_t>>& adj) {
    if (adj.empty()) return false;
    std::vector<char> seen(adj.size(), 0);
    std::queue<std::size_t> frontier;
    frontier.push(0);
    seen[0] = 1;
    std::size_t reached = 1;
    while (!frontier.empty()) {
        const auto v = frontier.front();
        frontier.pop();
        for (auto u : adj[v]) {
            if (!seen[u]) {
                seen[u] = 1;
                ++reached;
                frontier.push(u);
            }
        }
    }
    return reached == adj.size();
}

std::vector<std::vector<std::size_t>> adjacency(std::size_t m, std::span<const Edge> edges) {
    std::vector<std::vector<std::size_t>> adj(m);
    for (auto [i, j] : edges) {
        require(i < m && j < m, ErrorKind::InvalidSpec,
                "edge (" + std::to_string(i) + "," + std::to_string(j) + ") references a vertex outside [0," +
                    std::to_string(m) + ")");
        if (i == j) continue;
        adj[i].push_back(j);
        adj[j].push_back(i);
    }
    for (auto& list : adj) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    return adj;
}

std::vector<Edge> erdos_renyi_edges(std::size_t m, double p, std::uint64_t seed) {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            if (keyed_uniform(seed ^ stream_id("erdos_renyi"), i, j) < p) edges.emplace_back(i, j);
        }
    }
    return edges;
}

}  // namespace

Graph Graph::from_edges(std::size_t m, std::span<const Edge> edges) {
    require(m >= 1, ErrorKind::InvalidSpec, "graph needs at least one vertex");
    Graph g;
    g.neighbors_ = adjacency(m, edges);
    if (!is_connected(g.neighbors_)) {
        fail(ErrorKind::DisconnectedGraph, "edge set does not connect all " + std::to_string(m) + " vertices");
    }
    for (const auto& list : g.neighbors_) {
        g.max_degree_ = std::max(g.max_degree_, list.size());
        g.edge_count_ += list.size();
    }
    g.edge_count_ /= 2;
    if (m > 1) {
        g.lambda_max_ = dgc::lambda_max(g);
        const auto delta = static_cast<double>(g.max_degree_);
        // lambda_max lies in [Delta + 1, 2 Delta] for any graph with an edge.
        require(g.lambda_max_ >= delta * (1.0 - 1e-9) && g.lambda_max_ <= 2.0 * delta * (1.0 + 1e-9),
                ErrorKind::NoConvergence, "spectral estimate violates degree bounds");
    }
    return g;
}

Graph Graph::single_vertex() {
    Graph g;
    g.neighbors_.resize(1);
    return g;
}

std::vector<Edge> Graph::edges() const {
    std::vector<Edge> out;
    for (std::size_t i = 0; i < neighbors_.size(); ++i) {
        for (auto j : neighbors_[i]) {
            if (i < j) out.emplace_back(i, j);
        }
    }
    return out;
}

Graph build_graph(const TopologySpec& spec) {
    const auto m = spec.m;
    require(m >= 2, ErrorKind::InvalidSpec, "a distributed topology needs m >= 2 users, got " + std::to_string(m));
    std::vector<Edge> edges;
    switch (spec.kind) {
        case TopologyKind::ring:
            for (std::size_t i = 0; i < m; ++i) edges.emplace_back(i, (i + 1) % m);
            break;
        case TopologyKind::path:
            for (std::size_t i = 0; i + 1 < m; ++i) edges.emplace_back(i, i + 1);
            break;
        case TopologyKind::complete:
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = i + 1; j < m; ++j) edges.emplace_back(i, j);
            break;
        case TopologyKind::star:
            for (std::size_t i = 1; i < m; ++i) edges.emplace_back(0, i);
            break;
        case TopologyKind::custom:
            edges = spec.edges;
            break;
        case TopologyKind::erdos_renyi: {
            require(spec.p > 0.0 && spec.p <= 1.0, ErrorKind::InvalidSpec, "erdos_renyi requires p in (0,1]");
            constexpr int max_attempts = 100;
            for (int attempt = 0; attempt < max_attempts; ++attempt) {
                auto candidate = erdos_renyi_edges(m, spec.p, spec.seed + static_cast<std::uint64_t>(attempt));
                if (is_connected(adjacency(m, candidate))) return Graph::from_edges(m, candidate);
            }
            fail(ErrorKind::RetriesExhausted,
                 "erdos_renyi graph disconnected for " + std::to_string(max_attempts) + " consecutive seeds");
        }
    }
    return Graph::from_edges(m, edges);
}

void laplacian_apply(const Graph& graph, std::span<const double> field, std::size_t q, std::span<double> out) {
    const auto m = graph.size();
    require(field.size() == m * q && out.size() == m * q, ErrorKind::DimensionMismatch,
            "laplacian_apply expects " + std::to_string(m) + " x " + std::to_string(q) + " values");
    for (std::size_t i = 0; i < m; ++i) {
        const double* xi = field.data() + i * q;
        double* yi = out.data() + i * q;
        std::fill(yi, yi + q, 0.0);
        for (auto j : graph.neighbors(i)) {
            const double* xj = field.data() + j * q;
            for (std::size_t c = 0; c < q; ++c) yi[c] += xi[c] - xj[c];
        }
    }
}

std::vector<double> laplacian_apply(const Graph& graph, std::span<const double> field, std::size_t q) {
    std::vector<double> out(field.size());
    laplacian_apply(graph, field, q, out);
    return out;
}

SpectralEstimate estimate_lambda_max(const Graph& graph, const PowerIterationOptions& options) {
    const auto m = graph.size();
    SpectralEstimate est;
    if (m < 2) return est;

    // Start from all-ones plus a fixed pseudo-random perturbation, then remove
    // the kernel direction (the constant vector) so the iteration only sees
    // the nontrivial spectrum.
    std::vector<double> v(m), w(m);
    for (std::size_t i = 0; i < m; ++i) v[i] = 1.0 + (keyed_uniform(0x5eed, i, m) - 0.5);
    auto project_and_normalize = [m](std::vector<double>& x) {
        double mean = 0.0;
        for (double e : x) mean += e;
        mean /= static_cast<double>(m);
        double norm2 = 0.0;
        for (double& e : x) {
            e -= mean;
            norm2 += e * e;
        }
        const double inv = 1.0 / std::sqrt(norm2);
        for (double& e : x) e *= inv;
    };
    project_and_normalize(v);

    double previous = 0.0;
    for (std::size_t it = 1; it <= options.max_iterations; ++it) {
        laplacian_apply(graph, v, 1, w);
        double rayleigh = 0.0;
        for (std::size_t i = 0; i < m; ++i) rayleigh += v[i] * w[i];
        double res2 = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double r = w[i] - rayleigh * v[i];
            res2 += r * r;
        }
        est.value = rayleigh;
        est.residual = std::sqrt(res2);
        est.iterations = it;
        if (it > 1 && std::abs(rayleigh - previous) <= options.tolerance * rayleigh) {
            est.converged = true;
            return est;
        }
        previous = rayleigh;
        v.swap(w);
        project_and_normalize(v);
    }
    return est;
}

double lambda_max(const Graph& graph, const PowerIterationOptions& options) {
    const auto est = estimate_lambda_max(graph, options);
    if (graph.size() >= 2 && !est.converged) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "power iteration hit " << options.max_iterations << " iterations; best estimate " << est.value
            << " with residual " << est.residual;
        fail(ErrorKind::NoConvergence, msg.str());
    }
    return est.value;
}

std::vector<Edge> read_edge_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::IoError, "cannot open edge list '" + path.string() + "'");
    std::vector<Edge> edges;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream fields(line);
        long long i = -1, j = -1;
        std::string rest;
        if (!(fields >> i >> j) || i < 0 || j < 0 || (fields >> rest)) {
            fail(ErrorKind::ParseError, path.string() + ":" + std::to_string(line_no) + ": expected \"i j\"");
        }
        edges.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
    return edges;
}

}  // namespace dgc
