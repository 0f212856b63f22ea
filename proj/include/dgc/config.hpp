#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dgc/data.hpp"
#include "dgc/engine.hpp"
#include "dgc/graph.hpp"
#include "dgc/metrics.hpp"

namespace dgc {

enum class DatasetSource { csv, synthetic };
enum class SweepParameter { none, rho, B, m };

std::string_view to_string(DatasetSource s) noexcept;
std::string_view to_string(SweepParameter p) noexcept;

struct DatasetConfig {
    DatasetSource source = DatasetSource::csv;
    std::filesystem::path path;
    std::optional<std::size_t> label_column;
    Normalization normalize = Normalization::none;
    // synthetic mixture
    std::size_t components = 4;
    std::size_t points_per_component = 100;
    std::size_t dim = 2;
    std::vector<double> means;  // components x dim, row-major
    double variance = 1.0;
    std::uint64_t seed = 0;

    friend bool operator==(const DatasetConfig&, const DatasetConfig&) = default;
};

struct OutlierConfig {
    bool enabled = false;
    double fraction = 0.2;
    double noise_mean = 11.0;
    double noise_variance = 1.0;
    std::uint64_t seed = 0;
    double init_noise_variance = 1.0;  // outlier-demo center perturbation
    double huber_delta = 0.05;

    friend bool operator==(const OutlierConfig&, const OutlierConfig&) = default;
};

struct SweepConfig {
    SweepParameter parameter = SweepParameter::none;
    std::vector<double> values;

    friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

/// Everything but explicit initial centers, which have no file form.
struct RunSettings {
    LossKind loss = LossKind::kmeans;
    double delta = 5.0;
    double eta = 1.0;
    MetricKind metric = MetricKind::euclidean;
    std::vector<double> metric_matrix;
    double rho = 1.0;
    std::size_t B = 1;
    std::size_t T = 100;
    std::size_t K = 2;
    StepSize alpha;
    InitScheme init = InitScheme::random_local_sample;
    std::uint64_t seed = 0;
    WeightConvention weights = WeightConvention::normalized;
    ExecutionMode mode = ExecutionMode::sequential;
    std::size_t threads = 0;
    simd::Isa kernels = simd::Isa::automatic;
    double early_stop_tolerance = 0.0;
    EvaluationScope evaluation = EvaluationScope::global;

    friend bool operator==(const RunSettings&, const RunSettings&) = default;
};

struct ExperimentConfig {
    DatasetConfig dataset;
    OutlierConfig outlier;
    std::size_t m = 2;
    PartitionScheme partition = PartitionScheme::homogeneous;
    std::size_t classes_min = 1;
    std::size_t classes_max = 1;
    std::uint64_t partition_seed = 0;
    TopologyKind topology = TopologyKind::ring;
    double edge_probability = 0.5;
    std::uint64_t topology_seed = 0;
    std::filesystem::path edges_file;
    RunSettings run;
    SweepConfig sweep;
    std::size_t repeats = 1;
    std::filesystem::path output_dir = "out";

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;

    void validate() const;

    /// Engine configuration for repeat r (seeds offset by r).
    RunConfig run_config(std::size_t repeat) const;
    PartitionSpec partition_spec(std::size_t repeat) const;
    /// Reads the edge file for custom topologies.
    TopologySpec topology_spec() const;
};

/// INI text: [section] headers, key = value lines, '#' or ';' comments.
/// Unknown keys and malformed values throw InvalidSpec naming the field;
/// syntax errors name the line.
ExperimentConfig parse_config(std::string_view text);
/// Relative dataset and edge-file paths resolve against the config's directory.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

/// Applies one "section.key=value" override.
void apply_override(ExperimentConfig& config, std::string_view assignment);

void set_field(ExperimentConfig& config, std::string_view key, std::string_view value);

std::string format_number(double v);

}  // namespace dgc
