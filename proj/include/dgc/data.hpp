#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dgc {

/// Global weighted dataset. Points are row-major N x d; labels, when
/// present, are class ids in [0, class_count()).
struct LabeledDataset {
    std::size_t dim = 0;
    std::vector<double> points;
    std::vector<int> labels;  // empty when unlabeled
    std::vector<double> weights;
    std::vector<std::string> class_names;

    std::size_t size() const noexcept { return weights.size(); }
    bool has_labels() const noexcept { return !labels.empty(); }
    std::size_t class_count() const noexcept;
    std::span<const double> point(std::size_t r) const noexcept { return {points.data() + r * dim, dim}; }

    /// Throws when the invariants (dimensions, positive weights summing to
    /// one, label range) do not hold.
    void validate() const;
};

/// One user's local data. `coords` is the coordinate-major copy of
/// `points` (d rows of length size()) consumed by the vector kernels.
struct LocalShard {
    std::size_t dim = 0;
    std::vector<double> points;
    std::vector<double> coords;
    std::vector<double> weights;
    std::vector<int> labels;
    std::vector<std::size_t> global_index;

    std::size_t size() const noexcept { return weights.size(); }
    std::span<const double> point(std::size_t r) const noexcept { return {points.data() + r * dim, dim}; }
    void rebuild_coords();
};

struct ShardedDataset {
    std::size_t dim = 0;
    std::vector<LocalShard> shards;

    std::size_t user_count() const noexcept { return shards.size(); }
    std::size_t total_points() const noexcept;
    std::size_t max_shard_size() const noexcept;
    double total_weight() const noexcept;

    /// Copy with every weight multiplied by `scale`.
    ShardedDataset with_weight_scale(double scale) const;
};

enum class PartitionScheme { homogeneous, heterogeneous, random };
enum class Normalization { none, max_abs };

std::string_view to_string(PartitionScheme scheme) noexcept;
std::string_view to_string(Normalization n) noexcept;
PartitionScheme parse_partition_scheme(std::string_view name);
Normalization parse_normalization(std::string_view name);

struct PartitionSpec {
    PartitionScheme scheme = PartitionScheme::homogeneous;
    std::size_t classes_min = 1;  // heterogeneous only
    std::size_t classes_max = 1;
    std::uint64_t seed = 0;
};

/// n_per draws from N(means[c], variance I) for each of k components.
/// `means` is row-major k x d.
LabeledDataset generate_gaussian_mixture(std::size_t k, std::size_t n_per, std::span<const double> means,
                                         std::size_t dim, double variance, std::uint64_t seed);

LabeledDataset load_csv(const std::filesystem::path& path, std::optional<std::size_t> label_column,
                        Normalization normalize = Normalization::none);

/// Header "f0,...,f{d-1},label"; the label column is omitted for unlabeled data.
void write_csv(const LabeledDataset& ds, const std::filesystem::path& path);

ShardedDataset partition(const LabeledDataset& ds, std::size_t m, const PartitionSpec& spec);

/// Adds N(noise_mean, noise_variance) to every coordinate of ceil(fraction * n_c)
/// points of each class c and relabels them as a new outlier class.
LabeledDataset inject_outliers(const LabeledDataset& ds, double fraction, double noise_mean, double noise_variance,
                               std::uint64_t seed);

}  // namespace dgc
