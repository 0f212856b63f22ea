#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dgc/config.hpp"
#include "dgc/data.hpp"
#include "dgc/engine.hpp"
#include "dgc/metrics.hpp"

namespace dgc {

inline constexpr const char* kTraceHeader = "round,J_rho,J,consensus_gap,fixed_point_residual,cluster_changes";
inline constexpr const char* kSummaryHeader =
    "sweep_value,acc_mean,acc_std,ari_mean,ari_std,gap_mean,gap_std,Jrho_mean,Jrho_std,stability_round_mean";

struct RepeatOutcome {
    ShardedDataset shards;
    RunTrace trace;
    UserScores scores;  // empty when the dataset is unlabeled
};

struct SummaryRow {
    std::optional<double> sweep_value;
    double acc_mean = 0.0, acc_std = 0.0;
    double ari_mean = 0.0, ari_std = 0.0;
    double gap_mean = 0.0, gap_std = 0.0;
    double jrho_mean = 0.0, jrho_std = 0.0;
    double stability_round_mean = 0.0;
};

/// Dataset described by the config, without outlier injection.
LabeledDataset load_base_dataset(const ExperimentConfig& config);
/// load_base_dataset plus outlier injection when outlier.enabled.
LabeledDataset load_dataset(const ExperimentConfig& config);

RepeatOutcome run_repeat(const ExperimentConfig& config, const LabeledDataset& data, std::size_t repeat);

/// Sample mean and standard deviation (0 for a single repeat).
SummaryRow summarize(std::optional<double> sweep_value, const std::vector<RepeatOutcome>& outcomes);

std::string trace_csv(const RunTrace& trace);
std::string centers_csv(const CenterState& state);
std::string assignment_csv(const Clustering& clustering, const ShardedDataset& shards);
std::string summary_csv(const std::vector<SummaryRow>& rows);

/// DGC_OUTPUT_DIR when set, else the configured directory.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config);

/// Runs every repeat, writing trace_r<r>.csv, centers_r<r>.csv,
/// assignment_r<r>.csv and summary.csv into `out`.
SummaryRow cmd_run(const ExperimentConfig& config, const std::filesystem::path& out);

/// One cmd_run per swept value; files are prefixed "<parameter>_<value>_"
/// and a single summary.csv holds one row per value.
std::vector<SummaryRow> cmd_sweep(const ExperimentConfig& config, const std::filesystem::path& out);

struct OutlierMethodReport {
    std::string method;
    std::vector<double> centers;  // K x d, averaged over users and repeats
    std::vector<double> distance_to_good;
    std::vector<double> distance_to_outlier;
    bool verdict = true;  // every center nearer a good-class mean than the outlier mean
};

struct OutlierReport {
    std::size_t dim = 0;
    bool has_outliers = false;
    std::vector<double> good_means;  // K x d
    std::vector<double> outlier_mean;
    std::vector<OutlierMethodReport> methods;  // kmeans, huber
};

/// K-means and Huber runs from identical perturbed true-mean starts on the
/// outlier-injected data. Writes outlier_report.csv when `out` is given.
OutlierReport cmd_outlier_demo(const ExperimentConfig& config, const std::optional<std::filesystem::path>& out);

}  // namespace dgc
