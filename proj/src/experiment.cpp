#include "dgc/experiment.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>

#include "dgc/error.hpp"
#include "dgc/graph.hpp"
#include "dgc/rng.hpp"

namespace dgc {

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
    out << text;
    if (!out) fail(ErrorKind::IoError, "write failed: " + path.string());
}

void make_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
    if (v.empty()) return {0.0, 0.0};
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    if (v.size() < 2) return {m, 0.0};
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return {m, std::sqrt(s / static_cast<double>(v.size() - 1))};
}

std::string value_tag(double v) {
    std::string s = format_number(v);
    for (char& c : s)
        if (c == '+') c = 'p';
    return s;
}

double euclid(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) s += (a[t] - b[t]) * (a[t] - b[t]);
    return std::sqrt(s);
}

}  // namespace

LabeledDataset load_base_dataset(const ExperimentConfig& config) {
    const DatasetConfig& d = config.dataset;
    if (d.source == DatasetSource::synthetic)
        return generate_gaussian_mixture(d.components, d.points_per_component, d.means, d.dim, d.variance, d.seed);
    require(!d.path.empty(), ErrorKind::InvalidSpec, "dataset.path is empty");
    return load_csv(d.path, d.label_column, d.normalize);
}

LabeledDataset load_dataset(const ExperimentConfig& config) {
    LabeledDataset ds = load_base_dataset(config);
    const OutlierConfig& o = config.outlier;
    if (o.enabled && o.fraction > 0.0) ds = inject_outliers(ds, o.fraction, o.noise_mean, o.noise_variance, o.seed);
    return ds;
}

RepeatOutcome run_repeat(const ExperimentConfig& config, const LabeledDataset& data, std::size_t repeat) {
    RepeatOutcome out;
    Graph graph = build_graph(config.topology_spec());
    out.shards = partition(data, config.m, config.partition_spec(repeat));
    RunConfig rc = config.run_config(repeat);
    out.trace = run(graph, out.shards, rc);
    if (data.has_labels() && !out.trace.aborted)
        out.scores = evaluate_users(out.trace.final_state, data, out.shards, config.run.evaluation, rc.loss.metric);
    return out;
}

SummaryRow summarize(std::optional<double> sweep_value, const std::vector<RepeatOutcome>& outcomes) {
    std::vector<double> acc, ari, gap, jrho;
    double stab = 0.0;
    for (const auto& o : outcomes) {
        acc.push_back(o.scores.accuracy_mean);
        ari.push_back(o.scores.ari_mean);
        const RoundRecord last = o.trace.rounds.empty() ? RoundRecord{} : o.trace.rounds.back();
        gap.push_back(last.consensus_gap);
        jrho.push_back(last.J_rho);
        stab += static_cast<double>(stability_round(o.trace));
    }
    SummaryRow row;
    row.sweep_value = sweep_value;
    std::tie(row.acc_mean, row.acc_std) = mean_std(acc);
    std::tie(row.ari_mean, row.ari_std) = mean_std(ari);
    std::tie(row.gap_mean, row.gap_std) = mean_std(gap);
    std::tie(row.jrho_mean, row.jrho_std) = mean_std(jrho);
    if (!outcomes.empty()) row.stability_round_mean = stab / static_cast<double>(outcomes.size());
    return row;
}

std::string trace_csv(const RunTrace& trace) {
    std::string out = kTraceHeader;
    out += '\n';
    for (const auto& r : trace.rounds) {
        out += std::to_string(r.round) + ',' + format_number(r.J_rho) + ',' + format_number(r.J) + ',' +
               format_number(r.consensus_gap) + ',' + format_number(r.fixed_point_residual) + ',' +
               std::to_string(r.cluster_changes) + '\n';
    }
    return out;
}

std::string centers_csv(const CenterState& state) {
    std::string out = "user,cluster";
    for (std::size_t t = 0; t < state.dim(); ++t) out += ",f" + std::to_string(t);
    out += '\n';
    for (std::size_t i = 0; i < state.users(); ++i)
        for (std::size_t k = 0; k < state.clusters(); ++k) {
            out += std::to_string(i) + ',' + std::to_string(k);
            for (double v : state.center(i, k)) out += ',' + format_number(v);
            out += '\n';
        }
    return out;
}

std::string assignment_csv(const Clustering& clustering, const ShardedDataset& shards) {
    std::string out = "user,local_index,global_index,cluster\n";
    for (std::size_t i = 0; i < clustering.assignment.size(); ++i)
        for (std::size_t r = 0; r < clustering.assignment[i].size(); ++r)
            out += std::to_string(i) + ',' + std::to_string(r) + ',' +
                   std::to_string(shards.shards[i].global_index[r]) + ',' +
                   std::to_string(clustering.assignment[i][r]) + '\n';
    return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::string out = kSummaryHeader;
    out += '\n';
    for (const auto& r : rows) {
        out += r.sweep_value ? format_number(*r.sweep_value) : std::string();
        for (double v : {r.acc_mean, r.acc_std, r.ari_mean, r.ari_std, r.gap_mean, r.gap_std, r.jrho_mean,
                         r.jrho_std, r.stability_round_mean})
            out += ',' + format_number(v);
        out += '\n';
    }
    return out;
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& config) {
    if (const char* env = std::getenv("DGC_OUTPUT_DIR"); env && *env) return env;
    return config.output_dir;
}

namespace {

SummaryRow run_all(const ExperimentConfig& config, const LabeledDataset& data, const std::filesystem::path& out,
                   const std::string& prefix, std::optional<double> value) {
    std::vector<RepeatOutcome> outcomes;
    for (std::size_t r = 0; r < config.repeats; ++r) {
        RepeatOutcome o = run_repeat(config, data, r);
        std::string tag = prefix + "r" + std::to_string(r);
        write_file(out / ("trace_" + tag + ".csv"), trace_csv(o.trace));
        write_file(out / ("centers_" + tag + ".csv"), centers_csv(o.trace.final_state));
        write_file(out / ("assignment_" + tag + ".csv"), assignment_csv(o.trace.final_clustering, o.shards));
        if (o.trace.aborted)
            fail(ErrorKind::NonFiniteState, "repeat " + std::to_string(r) + " aborted at " + o.trace.abort_reason);
        outcomes.push_back(std::move(o));
    }
    return summarize(value, outcomes);
}

}  // namespace

SummaryRow cmd_run(const ExperimentConfig& config, const std::filesystem::path& out) {
    config.validate();
    make_dir(out);
    LabeledDataset data = load_dataset(config);
    SummaryRow row = run_all(config, data, out, "", std::nullopt);
    write_file(out / "summary.csv", summary_csv({row}));
    return row;
}

std::vector<SummaryRow> cmd_sweep(const ExperimentConfig& config, const std::filesystem::path& out) {
    config.validate();
    require(config.sweep.parameter != SweepParameter::none, ErrorKind::InvalidSpec, "sweep.parameter is none");
    make_dir(out);
    LabeledDataset data = load_dataset(config);
    std::vector<SummaryRow> rows;
    for (double v : config.sweep.values) {
        ExperimentConfig c = config;
        switch (config.sweep.parameter) {
            case SweepParameter::rho: c.run.rho = v; break;
            case SweepParameter::B: c.run.B = static_cast<std::size_t>(v); break;
            case SweepParameter::m: c.m = static_cast<std::size_t>(v); break;
            case SweepParameter::none: break;
        }
        if (config.sweep.parameter != SweepParameter::rho)
            require(std::floor(v) == v, ErrorKind::InvalidSpec, "sweep values for B and m must be integers");
        c.validate();
        std::string prefix = std::string(to_string(config.sweep.parameter)) + "_" + value_tag(v) + "_";
        rows.push_back(run_all(c, data, out, prefix, v));
    }
    write_file(out / "summary.csv", summary_csv(rows));
    return rows;
}

OutlierReport cmd_outlier_demo(const ExperimentConfig& config, const std::optional<std::filesystem::path>& out) {
    config.validate();
    const OutlierConfig& o = config.outlier;
    LabeledDataset base = load_base_dataset(config);
    require(base.has_labels(), ErrorKind::InvalidSpec, "outlier demo needs a labeled dataset");
    const std::size_t K = base.class_count();
    const std::size_t d = base.dim;
    LabeledDataset noisy = o.fraction > 0.0 ? inject_outliers(base, o.fraction, o.noise_mean, o.noise_variance, o.seed)
                                            : base;

    OutlierReport report;
    report.dim = d;
    report.has_outliers = noisy.class_count() > K;
    report.good_means.assign(K * d, 0.0);
    report.outlier_mean.assign(d, 0.0);
    std::vector<double> count(K + 1, 0.0);
    for (std::size_t r = 0; r < noisy.size(); ++r) {
        auto c = static_cast<std::size_t>(noisy.labels[r]);
        double* dst = c < K ? &report.good_means[c * d] : report.outlier_mean.data();
        for (std::size_t t = 0; t < d; ++t) dst[t] += noisy.point(r)[t];
        count[std::min(c, K)] += 1.0;
    }
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t t = 0; t < d; ++t) report.good_means[k * d + t] /= count[k];
    if (count[K] > 0.0)
        for (double& v : report.outlier_mean) v /= count[K];

    Graph graph = build_graph(config.topology_spec());
    const double sd = std::sqrt(o.init_noise_variance);
    std::vector<std::pair<std::string, LossKind>> methods = {{"kmeans", LossKind::kmeans}, {"huber", LossKind::huber}};
    for (const auto& [name, kind] : methods) {
        OutlierMethodReport m;
        m.method = name;
        m.centers.assign(K * d, 0.0);
        for (std::size_t r = 0; r < config.repeats; ++r) {
            ShardedDataset shards = partition(noisy, config.m, config.partition_spec(r));
            RunConfig rc = config.run_config(r);
            rc.K = K;
            rc.loss.kind = kind;
            rc.loss.delta = o.huber_delta;
            CenterState init(shards.user_count(), K, d);
            for (std::size_t i = 0; i < shards.user_count(); ++i) {
                CounterRng rng(rc.seed, stream_id("outlier_demo.init"), i);
                for (std::size_t k = 0; k < K; ++k)
                    for (std::size_t t = 0; t < d; ++t)
                        init.center(i, k)[t] = report.good_means[k * d + t] + rng.normal(0.0, sd);
            }
            rc.init.scheme = InitScheme::explicit_centers;
            rc.init.centers = std::move(init);
            RunTrace trace = run(graph, shards, rc);
            if (trace.aborted) fail(ErrorKind::NonFiniteState, name + " run aborted at " + trace.abort_reason);
            if (out) {
                make_dir(*out);
                write_file(*out / ("trace_" + name + "_r" + std::to_string(r) + ".csv"), trace_csv(trace));
            }
            for (std::size_t i = 0; i < shards.user_count(); ++i)
                for (std::size_t k = 0; k < K; ++k)
                    for (std::size_t t = 0; t < d; ++t) m.centers[k * d + t] += trace.final_state.center(i, k)[t];
        }
        const double n = static_cast<double>(config.repeats * config.m);
        for (double& v : m.centers) v /= n;
        for (std::size_t k = 0; k < K; ++k) {
            std::span<const double> c(m.centers.data() + k * d, d);
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t g = 0; g < K; ++g)
                best = std::min(best, euclid(c, std::span<const double>(report.good_means.data() + g * d, d)));
            double bad = report.has_outliers ? euclid(c, report.outlier_mean) : std::numeric_limits<double>::infinity();
            m.distance_to_good.push_back(best);
            m.distance_to_outlier.push_back(bad);
            if (!(best < bad)) m.verdict = false;
        }
        report.methods.push_back(std::move(m));
    }

    if (out) {
        make_dir(*out);
        std::string csv = "method,cluster";
        for (std::size_t t = 0; t < d; ++t) csv += ",f" + std::to_string(t);
        csv += ",dist_good,dist_outlier,nearer_good\n";
        for (const auto& m : report.methods)
            for (std::size_t k = 0; k < K; ++k) {
                csv += m.method + ',' + std::to_string(k);
                for (std::size_t t = 0; t < d; ++t) csv += ',' + format_number(m.centers[k * d + t]);
                csv += ',' + format_number(m.distance_to_good[k]) + ',' +
                       (report.has_outliers ? format_number(m.distance_to_outlier[k]) : std::string("inf")) + ',' +
                       (m.distance_to_good[k] < m.distance_to_outlier[k] ? "true" : "false") + '\n';
            }
        write_file(*out / "outlier_report.csv", csv);
    }
    return report;
}

}  // namespace dgc
