#include "dgc/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "dgc/error.hpp"
#include "dgc/rng.hpp"

namespace dgc {

std::string_view to_string(PartitionScheme scheme) noexcept {
    switch (scheme) {
        case PartitionScheme::homogeneous: return "homogeneous";
        case PartitionScheme::heterogeneous: return "heterogeneous";
        case PartitionScheme::random: return "random";
    }
    return "unknown";
}

std::string_view to_string(Normalization n) noexcept { return n == Normalization::none ? "none" : "max_abs"; }

PartitionScheme parse_partition_scheme(std::string_view name) {
    for (auto s : {PartitionScheme::homogeneous, PartitionScheme::heterogeneous, PartitionScheme::random}) {
        if (name == to_string(s)) return s;
    }
    fail(ErrorKind::InvalidSpec, "unknown partition scheme '" + std::string(name) + "'");
}

Normalization parse_normalization(std::string_view name) {
    if (name == "none") return Normalization::none;
    if (name == "max_abs") return Normalization::max_abs;
    fail(ErrorKind::InvalidSpec, "unknown normalization '" + std::string(name) + "'");
}

std::size_t LabeledDataset::class_count() const noexcept {
    if (labels.empty()) return 0;
    return static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end())) + 1;
}

void LabeledDataset::validate() const {
    const auto n = size();
    require(n > 0 && dim > 0, ErrorKind::EmptyInput, "dataset has no points");
    require(points.size() == n * dim, ErrorKind::DimensionMismatch, "point buffer does not match N x d");
    require(labels.empty() || labels.size() == n, ErrorKind::LengthMismatch, "labels and points differ in count");
    double total = 0.0;
    for (double w : weights) {
        require(w > 0.0 && std::isfinite(w), ErrorKind::InvalidSpec, "weights must be positive");
        total += w;
    }
    require(std::abs(total - 1.0) <= 1e-9, ErrorKind::InvalidSpec, "weights must sum to one");
    for (int l : labels) require(l >= 0, ErrorKind::InvalidSpec, "negative label");
}

void LocalShard::rebuild_coords() {
    const auto n = size();
    coords.assign(n * dim, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t t = 0; t < dim; ++t) coords[t * n + r] = points[r * dim + t];
}

std::size_t ShardedDataset::total_points() const noexcept {
    std::size_t n = 0;
    for (const auto& s : shards) n += s.size();
    return n;
}

std::size_t ShardedDataset::max_shard_size() const noexcept {
    std::size_t n = 0;
    for (const auto& s : shards) n = std::max(n, s.size());
    return n;
}

double ShardedDataset::total_weight() const noexcept {
    double w = 0.0;
    for (const auto& s : shards)
        for (double v : s.weights) w += v;
    return w;
}

ShardedDataset ShardedDataset::with_weight_scale(double scale) const {
    ShardedDataset out = *this;
    for (auto& s : out.shards)
        for (auto& w : s.weights) w *= scale;
    return out;
}

LabeledDataset generate_gaussian_mixture(std::size_t k, std::size_t n_per, std::span<const double> means,
                                         std::size_t dim, double variance, std::uint64_t seed) {
    require(k >= 1 && n_per >= 1 && dim >= 1, ErrorKind::InvalidSpec, "mixture needs k, n_per, d >= 1");
    require(variance > 0.0, ErrorKind::InvalidSpec, "mixture variance must be positive");
    require(means.size() == k * dim, ErrorKind::InvalidSpec, "mixture means must be k x d");
    LabeledDataset ds;
    ds.dim = dim;
    const auto n = k * n_per;
    ds.points.reserve(n * dim);
    ds.labels.reserve(n);
    const double sd = std::sqrt(variance);
    CounterRng rng(seed, "gaussian_mixture");
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t r = 0; r < n_per; ++r) {
            for (std::size_t t = 0; t < dim; ++t) ds.points.push_back(rng.normal(means[c * dim + t], sd));
            ds.labels.push_back(static_cast<int>(c));
        }
        ds.class_names.push_back(std::to_string(c));
    }
    ds.weights.assign(n, 1.0 / static_cast<double>(n));
    return ds;
}

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::optional<double> parse_number(std::string_view s) {
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace

LabeledDataset load_csv(const std::filesystem::path& path, std::optional<std::size_t> label_column,
                        Normalization normalize) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::IoError, "cannot open '" + path.string() + "'");

    LabeledDataset ds;
    std::map<std::string, int, std::less<>> class_ids;
    std::size_t columns = 0;
    std::size_t line_no = 0;
    bool first_row = true;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (first_row) {
            first_row = false;
            columns = fields.size();
            if (label_column) {
                require(*label_column < columns, ErrorKind::ParseError,
                        path.string() + ": label column " + std::to_string(*label_column) + " out of range");
            }
            bool header = false;
            for (std::size_t c = 0; c < fields.size(); ++c) {
                if (label_column && c == *label_column) continue;
                if (!parse_number(fields[c])) header = true;
            }
            ds.dim = columns - (label_column ? 1 : 0);
            require(ds.dim > 0, ErrorKind::ParseError, path.string() + ": no feature columns");
            if (header) continue;
        }
        if (fields.size() != columns) {
            fail(ErrorKind::RaggedRows, path.string() + ":" + std::to_string(line_no) + ": expected " +
                                            std::to_string(columns) + " fields, found " +
                                            std::to_string(fields.size()));
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (label_column && c == *label_column) {
                auto it = class_ids.find(fields[c]);
                if (it == class_ids.end()) {
                    it = class_ids.emplace(std::string(fields[c]), static_cast<int>(ds.class_names.size())).first;
                    ds.class_names.emplace_back(fields[c]);
                }
                ds.labels.push_back(it->second);
                continue;
            }
            const auto v = parse_number(fields[c]);
            if (!v) {
                fail(ErrorKind::ParseError, path.string() + ": row " + std::to_string(line_no) + ", column " +
                                                std::to_string(c) + ": '" + std::string(fields[c]) +
                                                "' is not a number");
            }
            ds.points.push_back(*v);
        }
    }
    if (ds.dim == 0 || ds.points.empty()) fail(ErrorKind::EmptyFile, "'" + path.string() + "' has no data rows");

    const auto n = ds.points.size() / ds.dim;
    if (normalize == Normalization::max_abs) {
        double peak = 0.0;
        for (double v : ds.points) peak = std::max(peak, std::abs(v));
        if (peak > 0.0)
            for (double& v : ds.points) v /= peak;
    }
    ds.weights.assign(n, 1.0 / static_cast<double>(n));
    return ds;
}

namespace {

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

void write_csv(const LabeledDataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::IoError, "cannot write '" + path.string() + "'");
    for (std::size_t t = 0; t < ds.dim; ++t) out << (t ? "," : "") << 'f' << t;
    if (ds.has_labels()) out << ",label";
    out << '\n';
    for (std::size_t r = 0; r < ds.size(); ++r) {
        for (std::size_t t = 0; t < ds.dim; ++t) out << (t ? "," : "") << format_double(ds.points[r * ds.dim + t]);
        if (ds.has_labels()) out << ',' << ds.labels[r];
        out << '\n';
    }
    if (!out) fail(ErrorKind::IoError, "error while writing '" + path.string() + "'");
}

namespace {

ShardedDataset materialize(const LabeledDataset& ds, const std::vector<std::vector<std::size_t>>& members) {
    ShardedDataset out;
    out.dim = ds.dim;
    out.shards.resize(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
        auto& s = out.shards[i];
        s.dim = ds.dim;
        for (auto r : members[i]) {
            const auto p = ds.point(r);
            s.points.insert(s.points.end(), p.begin(), p.end());
            s.weights.push_back(ds.weights[r]);
            if (ds.has_labels()) s.labels.push_back(ds.labels[r]);
            s.global_index.push_back(r);
        }
        s.rebuild_coords();
    }
    return out;
}

std::vector<std::vector<std::size_t>> class_members(const LabeledDataset& ds) {
    std::vector<std::vector<std::size_t>> by_class(std::max<std::size_t>(ds.class_count(), 1));
    for (std::size_t r = 0; r < ds.size(); ++r) by_class[ds.has_labels() ? ds.labels[r] : 0].push_back(r);
    return by_class;
}

void repair_empty(std::vector<std::vector<std::size_t>>& members) {
    for (auto& target : members) {
        if (!target.empty()) continue;
        auto largest = std::max_element(members.begin(), members.end(),
                                        [](const auto& a, const auto& b) { return a.size() < b.size(); });
        target.push_back(largest->back());
        largest->pop_back();
    }
}

}  // namespace

ShardedDataset partition(const LabeledDataset& ds, std::size_t m, const PartitionSpec& spec) {
    const auto n = ds.size();
    require(m >= 1, ErrorKind::InvalidSpec, "partition needs m >= 1");
    require(n >= m, ErrorKind::TooFewPoints,
            "cannot split " + std::to_string(n) + " points across " + std::to_string(m) + " users");

    std::vector<std::vector<std::size_t>> members(m);
    if (m == 1) {
        members[0].resize(n);
        std::iota(members[0].begin(), members[0].end(), std::size_t{0});
        return materialize(ds, members);
    }

    switch (spec.scheme) {
        case PartitionScheme::random: {
            std::vector<std::size_t> order(n);
            std::iota(order.begin(), order.end(), std::size_t{0});
            CounterRng rng(spec.seed, "partition.random");
            shuffle(std::span(order), rng);
            for (std::size_t r = 0; r < n; ++r) members[r % m].push_back(order[r]);
            break;
        }
        case PartitionScheme::homogeneous: {
            // Deal each class round-robin; the dealer position carries over
            // between classes so per-user totals stay balanced too.
            auto by_class = class_members(ds);
            std::size_t dealer = 0;
            for (std::size_t c = 0; c < by_class.size(); ++c) {
                CounterRng rng(spec.seed, "partition.homogeneous", c);
                shuffle(std::span(by_class[c]), rng);
                for (auto r : by_class[c]) {
                    members[dealer].push_back(r);
                    dealer = (dealer + 1) % m;
                }
            }
            break;
        }
        case PartitionScheme::heterogeneous: {
            require(ds.has_labels(), ErrorKind::InvalidSpec, "heterogeneous partition requires labels");
            auto by_class = class_members(ds);
            const auto classes = by_class.size();
            require(spec.classes_min >= 1 && spec.classes_min <= spec.classes_max && spec.classes_max <= classes,
                    ErrorKind::InvalidSpec, "classes_per_user must satisfy 1 <= lo <= hi <= class count");
            std::vector<std::vector<std::size_t>> holders(classes);
            CounterRng pick(spec.seed, "partition.heterogeneous.classes");
            for (std::size_t i = 0; i < m; ++i) {
                const auto count =
                    spec.classes_min + static_cast<std::size_t>(pick.below(spec.classes_max - spec.classes_min + 1));
                for (auto c : sample_without_replacement(classes, count, pick)) holders[c].push_back(i);
            }
            for (auto& h : holders) std::sort(h.begin(), h.end());
            for (std::size_t c = 0; c < classes; ++c) {
                CounterRng rng(spec.seed, "partition.heterogeneous.deal", c);
                shuffle(std::span(by_class[c]), rng);
            }
            std::vector<std::size_t> orphans;
            for (std::size_t c = 0; c < classes; ++c) {
                if (holders[c].empty()) {
                    orphans.push_back(c);
                    continue;
                }
                std::size_t slot = 0;
                for (auto r : by_class[c]) {
                    members[holders[c][slot]].push_back(r);
                    slot = (slot + 1) % holders[c].size();
                }
            }
            // Nobody drew these classes; hand each to the least-loaded user.
            for (auto c : orphans) {
                auto target = std::min_element(members.begin(), members.end(),
                                               [](const auto& a, const auto& b) { return a.size() < b.size(); });
                target->insert(target->end(), by_class[c].begin(), by_class[c].end());
            }
            break;
        }
    }
    repair_empty(members);
    return materialize(ds, members);
}

LabeledDataset inject_outliers(const LabeledDataset& ds, double fraction, double noise_mean, double noise_variance,
                               std::uint64_t seed) {
    require(ds.has_labels(), ErrorKind::InvalidSpec, "outlier injection requires labels");
    require(fraction > 0.0 && fraction < 1.0, ErrorKind::InvalidSpec, "outlier fraction must lie in (0,1)");
    require(noise_variance > 0.0, ErrorKind::InvalidSpec, "outlier noise variance must be positive");

    LabeledDataset out = ds;
    const int outlier_label = static_cast<int>(ds.class_count());
    const double sd = std::sqrt(noise_variance);
    auto by_class = class_members(ds);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        const auto& members = by_class[c];
        if (members.empty()) continue;
        // The small slack keeps e.g. 0.2 * 50 from rounding up to 11.
        const auto count = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(members.size()) - 1e-9));
        CounterRng rng(seed, "inject_outliers", c);
        for (auto pos : sample_without_replacement(members.size(), count, rng)) {
            const auto r = members[pos];
            for (std::size_t t = 0; t < ds.dim; ++t) out.points[r * ds.dim + t] += rng.normal(noise_mean, sd);
            out.labels[r] = outlier_label;
        }
    }
    out.class_names.resize(static_cast<std::size_t>(outlier_label));
    out.class_names.emplace_back("outlier");
    return out;
}

}  // namespace dgc
