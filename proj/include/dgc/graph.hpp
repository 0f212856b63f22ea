#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace dgc {

enum class TopologyKind { ring, complete, star, path, erdos_renyi, custom };

std::string_view to_string(TopologyKind kind) noexcept;
TopologyKind parse_topology_kind(std::string_view name);

using Edge = std::pair<std::size_t, std::size_t>;

struct TopologySpec {
    TopologyKind kind = TopologyKind::ring;
    std::size_t m = 2;
    double p = 0.5;               // erdos_renyi only
    std::uint64_t seed = 0;       // erdos_renyi only
    std::vector<Edge> edges;      // custom only
};

/// Undirected, connected communication graph. Immutable after construction.
class Graph {
public:
    /// Throws DisconnectedGraph when the edge set does not connect all m
    /// vertices (m = 1 is accepted and is the centralized special case).
    static Graph from_edges(std::size_t m, std::span<const Edge> edges);

    /// One vertex, no edges.
    static Graph single_vertex();

    std::size_t size() const noexcept { return neighbors_.size(); }
    std::span<const std::size_t> neighbors(std::size_t i) const noexcept { return neighbors_[i]; }
    std::size_t degree(std::size_t i) const noexcept { return neighbors_[i].size(); }
    std::size_t max_degree() const noexcept { return max_degree_; }
    std::size_t edge_count() const noexcept { return edge_count_; }
    double lambda_max() const noexcept { return lambda_max_; }

    /// Unique edges (i < j), sorted lexicographically.
    std::vector<Edge> edges() const;

private:
    Graph() = default;

    std::vector<std::vector<std::size_t>> neighbors_;
    std::size_t max_degree_ = 0;
    std::size_t edge_count_ = 0;
    double lambda_max_ = 0.0;
};

Graph build_graph(const TopologySpec& spec);

/// Applies (L (x) I_q) to a per-vertex field stored row-major as m x q.
/// Vertex i receives sum over neighbours j of (field_i - field_j).
void laplacian_apply(const Graph& graph, std::span<const double> field, std::size_t q, std::span<double> out);
std::vector<double> laplacian_apply(const Graph& graph, std::span<const double> field, std::size_t q);

struct PowerIterationOptions {
    double tolerance = 1e-12;
    std::size_t max_iterations = 10'000;
};

struct SpectralEstimate {
    double value = 0.0;
    double residual = 0.0;  // || L v - value v || for the unit iterate v
    std::size_t iterations = 0;
    bool converged = false;
};

/// Largest Laplacian eigenvalue by deterministic power iteration; never throws.
SpectralEstimate estimate_lambda_max(const Graph& graph, const PowerIterationOptions& options = {});

/// As above but throws NoConvergence (with the best estimate in the message).
double lambda_max(const Graph& graph, const PowerIterationOptions& options = {});

/// Reads "i j" edge lines; '#' starts a comment line.
std::vector<Edge> read_edge_list(const std::filesystem::path& path);

}  // namespace dgc
