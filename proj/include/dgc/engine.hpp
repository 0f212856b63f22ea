#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dgc/data.hpp"
#include "dgc/graph.hpp"
#include "dgc/losses.hpp"
#include "dgc/simd/kernels.hpp"

namespace dgc {

class WorkerPool;

/// Per-user center estimates, an m x K x d tensor stored contiguously.
class CenterState {
public:
    CenterState() = default;
    CenterState(std::size_t users, std::size_t clusters, std::size_t dim, double fill = 0.0)
        : users_(users), clusters_(clusters), dim_(dim), values_(users * clusters * dim, fill) {}

    std::size_t users() const noexcept { return users_; }
    std::size_t clusters() const noexcept { return clusters_; }
    std::size_t dim() const noexcept { return dim_; }

    std::span<double> center(std::size_t i, std::size_t k) noexcept {
        return {values_.data() + (i * clusters_ + k) * dim_, dim_};
    }
    std::span<const double> center(std::size_t i, std::size_t k) const noexcept {
        return {values_.data() + (i * clusters_ + k) * dim_, dim_};
    }
    /// User i's K x d block.
    std::span<const double> user(std::size_t i) const noexcept {
        return {values_.data() + i * clusters_ * dim_, clusters_ * dim_};
    }
    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    bool all_finite() const noexcept;

    friend bool operator==(const CenterState&, const CenterState&) = default;

private:
    std::size_t users_ = 0;
    std::size_t clusters_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> values_;
};

/// Hard assignment of every local point of every user to one cluster.
struct Clustering {
    std::size_t clusters = 0;
    std::vector<std::vector<unsigned>> assignment;  // [user][local point]

    std::size_t total_points() const noexcept;
    friend bool operator==(const Clustering&, const Clustering&) = default;
};

enum class StepRule { theorem1, experimental, explicit_value };
/// random_shared_sample: K distinct points drawn from the pooled data, the
/// same draw for every user.
enum class InitScheme { random_local_sample, random_shared_sample, warm_start_per_class, explicit_centers };
enum class WeightConvention { normalized, unit };
enum class ExecutionMode { sequential, parallel };

std::string_view to_string(StepRule rule) noexcept;
std::string_view to_string(InitScheme scheme) noexcept;
std::string_view to_string(WeightConvention w) noexcept;
std::string_view to_string(ExecutionMode mode) noexcept;
InitScheme parse_init_scheme(std::string_view name);
WeightConvention parse_weight_convention(std::string_view name);
ExecutionMode parse_execution_mode(std::string_view name);

struct StepSize {
    StepRule rule = StepRule::theorem1;
    double value = 0.0;  // explicit_value only

    friend bool operator==(const StepSize&, const StepSize&) = default;
};

struct InitSpec {
    InitScheme scheme = InitScheme::random_local_sample;
    std::optional<CenterState> centers;  // explicit_centers only
};

struct RunConfig {
    double rho = 1.0;
    std::size_t B = 1;
    std::size_t T = 100;
    std::size_t K = 2;
    StepSize alpha;
    InitSpec init;
    LossSpec loss;
    std::uint64_t seed = 0;
    /// `unit` rescales the dataset weights to mean one (w = 1 for uniform
    /// data), the scale the reference experiments are run at; `normalized`
    /// keeps weights summing to one.
    WeightConvention weights = WeightConvention::normalized;
    ExecutionMode mode = ExecutionMode::sequential;
    std::size_t threads = 0;  // 0: hardware concurrency (parallel mode only)
    simd::Isa kernels = simd::Isa::automatic;
    double early_stop_tolerance = 0.0;  // 0 disables early stopping
    std::size_t early_stop_window = 10;

    void validate() const;
};

struct RoundRecord {
    std::size_t round = 0;
    double J_rho = 0.0;
    double J = 0.0;
    double consensus_gap = 0.0;
    double fixed_point_residual = 0.0;
    std::size_t cluster_changes = 0;
};

struct RunTrace {
    std::vector<RoundRecord> rounds;
    CenterState initial;
    CenterState final_state;
    Clustering final_clustering;
    double alpha_used = 0.0;
    std::string kernel;
    bool aborted = false;       // NonFiniteState stopped the run early
    std::string abort_reason;
};

/// Invoked after every round with the round's record, x^{t+1} and C^{t+1}.
using RoundObserver = std::function<void(const RoundRecord&, const CenterState&, const Clustering&)>;

double compute_step_size(StepRule rule, double beta, double rho, double lam_max, std::size_t m,
                         std::size_t max_shard, double explicit_value = 0.0);

/// Smoothness constant of the weighted clustering cost seen by one center:
/// beta(f) scaled by the largest per-user weight mass (at least one) and, for
/// Mahalanobis metrics, by the Frobenius norm of A.
double cost_smoothness(const LossSpec& loss, const ShardedDataset& shards);

CenterState initialize_centers(const ShardedDataset& shards, const RunConfig& config);

/// Nearest center under g for every local point, lowest index on ties.
Clustering assign_clusters(const CenterState& state, const ShardedDataset& shards, const MetricSpec& metric,
                           const simd::KernelTable& kernels = simd::default_kernels(), WorkerPool* pool = nullptr);

/// Stacked gradient (1/rho) grad J + L x of the relaxed cost at fixed clustering.
std::vector<double> relaxed_gradient(const CenterState& state, const Clustering& clustering, const Graph& graph,
                                     const ShardedDataset& shards, const LossSpec& loss, double rho,
                                     const simd::KernelTable& kernels = simd::default_kernels());

/// B synchronous consensus + innovation sub-rounds.
CenterState center_round(const CenterState& state, const Clustering& clustering, const Graph& graph,
                         const ShardedDataset& shards, const LossSpec& loss, double rho, double alpha, std::size_t B,
                         const simd::KernelTable& kernels = simd::default_kernels(), WorkerPool* pool = nullptr);

double cost_J(const CenterState& state, const Clustering& clustering, const ShardedDataset& shards,
              const LossSpec& loss);
double cost_J_rho(const CenterState& state, const Clustering& clustering, const ShardedDataset& shards,
                  const Graph& graph, const LossSpec& loss, double rho);
double consensus_gap(const CenterState& state);
double fixed_point_residual(const CenterState& state, const Clustering& clustering, const ShardedDataset& shards,
                            const Graph& graph, const LossSpec& loss, double rho,
                            const simd::KernelTable& kernels = simd::default_kernels());

RunTrace run(const Graph& graph, const ShardedDataset& shards, const RunConfig& config,
             const RoundObserver& observer = {});

/// Single user holding all data, no consensus term, rho = 1. The
/// experimental step preset is 1 / (2 |D|).
RunTrace run_centralized(const LabeledDataset& dataset, const RunConfig& config, const RoundObserver& observer = {});

/// run_centralized on each shard in isolation.
std::vector<RunTrace> run_local(const ShardedDataset& shards, const RunConfig& config);

/// Weighted cluster means of the global clustering induced by `clustering`.
/// Empty clusters keep `previous` (K x d) when given, else the global
/// weighted mean. Returns K x d row-major.
std::vector<double> lloyd_oracle(const ShardedDataset& shards, const Clustering& clustering,
                                 std::optional<std::span<const double>> previous = std::nullopt);

std::vector<double> lloyd_oracle(std::span<const double> points, std::span<const double> weights, std::size_t dim,
                                 std::span<const unsigned> assignment, std::size_t clusters,
                                 std::optional<std::span<const double>> previous = std::nullopt);

/// First round after which cluster_changes stays 0 until the end of the
/// trace; rounds.size() + 1 when the last round still changed.
std::size_t stability_round(const RunTrace& trace) noexcept;

}  // namespace dgc
