#include "dgc/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "dgc/error.hpp"

namespace dgc {

std::string_view to_string(DatasetSource s) noexcept { return s == DatasetSource::synthetic ? "synthetic" : "csv"; }

std::string_view to_string(SweepParameter p) noexcept {
    switch (p) {
        case SweepParameter::none: return "none";
        case SweepParameter::rho: return "rho";
        case SweepParameter::B: return "B";
        case SweepParameter::m: return "m";
    }
    return "?";
}

std::string format_number(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

namespace {

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view expected) {
    fail(ErrorKind::InvalidSpec,
         std::string(key) + ": '" + std::string(value) + "' is not " + std::string(expected));
}

std::string_view trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(std::string_view key, std::string_view v) {
    v = trim(v);
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) bad(key, v, "a number");
    return out;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
    v = trim(v);
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) bad(key, v, "a nonnegative integer");
    return out;
}

std::size_t to_size(std::string_view key, std::string_view v) { return static_cast<std::size_t>(to_u64(key, v)); }

bool to_bool(std::string_view key, std::string_view v) {
    v = trim(v);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    bad(key, v, "a boolean");
}

std::vector<double> to_list(std::string_view key, std::string_view v) {
    std::vector<double> out;
    std::string s(v);
    for (char& c : s)
        if (c == ',' || c == ';') c = ' ';
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(to_double(key, tok));
    return out;
}

std::string list_text(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ' ';
        out += format_number(v[i]);
    }
    return out;
}

// Parsers that throw on unknown names, rewrapped with the field name.
template <class F>
auto named(std::string_view key, std::string_view v, F parse) {
    try {
        return parse(trim(v));
    } catch (const Error& e) {
        fail(ErrorKind::InvalidSpec, std::string(key) + ": " + e.what());
    }
}

struct Field {
    const char* section;
    const char* key;
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, std::string_view, std::string_view)> set;
};

#define DGC_NUM(sec, name, member)                                                          \
    Field{sec, name, [](const ExperimentConfig& c) { return format_number(c.member); },      \
          [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.member = to_double(k, v); }}
#define DGC_SIZE(sec, name, member)                                                         \
    Field{sec, name, [](const ExperimentConfig& c) { return std::to_string(c.member); },     \
          [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.member = to_size(k, v); }}
#define DGC_U64(sec, name, member)                                                          \
    Field{sec, name, [](const ExperimentConfig& c) { return std::to_string(c.member); },     \
          [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.member = to_u64(k, v); }}
#define DGC_ENUM(sec, name, member, parser)                                                 \
    Field{sec, name, [](const ExperimentConfig& c) { return std::string(to_string(c.member)); }, \
          [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.member = named(k, v, parser); }}

DatasetSource parse_source(std::string_view v) {
    if (v == "csv") return DatasetSource::csv;
    if (v == "synthetic") return DatasetSource::synthetic;
    fail(ErrorKind::InvalidSpec, "unknown dataset source '" + std::string(v) + "'");
}

SweepParameter parse_sweep(std::string_view v) {
    if (v == "none" || v.empty()) return SweepParameter::none;
    if (v == "rho") return SweepParameter::rho;
    if (v == "B") return SweepParameter::B;
    if (v == "m") return SweepParameter::m;
    fail(ErrorKind::InvalidSpec, "unknown sweep parameter '" + std::string(v) + "'");
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        DGC_ENUM("dataset", "source", dataset.source, parse_source),
        Field{"dataset", "path", [](const ExperimentConfig& c) { return c.dataset.path.string(); },
              [](ExperimentConfig& c, std::string_view, std::string_view v) { c.dataset.path = std::string(trim(v)); }},
        Field{"dataset", "label_column",
              [](const ExperimentConfig& c) {
                  return c.dataset.label_column ? std::to_string(*c.dataset.label_column) : std::string("none");
              },
              [](ExperimentConfig& c, std::string_view k, std::string_view v) {
                  if (trim(v) == "none" || trim(v).empty())
                      c.dataset.label_column.reset();
                  else
                      c.dataset.label_column = to_size(k, v);
              }},
        DGC_ENUM("dataset", "normalize", dataset.normalize, parse_normalization),
        DGC_SIZE("dataset", "components", dataset.components),
        DGC_SIZE("dataset", "points_per_component", dataset.points_per_component),
        DGC_SIZE("dataset", "dim", dataset.dim),
        Field{"dataset", "means", [](const ExperimentConfig& c) { return list_text(c.dataset.means); },
              [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.dataset.means = to_list(k, v); }},
        DGC_NUM("dataset", "variance", dataset.variance),
        DGC_U64("dataset", "seed", dataset.seed),

        Field{"outlier", "enabled", [](const ExperimentConfig& c) { return std::string(c.outlier.enabled ? "true" : "false"); },
              [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.outlier.enabled = to_bool(k, v); }},
        DGC_NUM("outlier", "fraction", outlier.fraction),
        DGC_NUM("outlier", "noise_mean", outlier.noise_mean),
        DGC_NUM("outlier", "noise_variance", outlier.noise_variance),
        DGC_U64("outlier", "seed", outlier.seed),
        DGC_NUM("outlier", "init_noise_variance", outlier.init_noise_variance),
        DGC_NUM("outlier", "huber_delta", outlier.huber_delta),

        DGC_SIZE("partition", "m", m),
        DGC_ENUM("partition", "scheme", partition, parse_partition_scheme),
        DGC_SIZE("partition", "classes_min", classes_min),
        DGC_SIZE("partition", "classes_max", classes_max),
        DGC_U64("partition", "seed", partition_seed),

        DGC_ENUM("topology", "kind", topology, parse_topology_kind),
        DGC_NUM("topology", "p", edge_probability),
        DGC_U64("topology", "seed", topology_seed),
        Field{"topology", "edges_file", [](const ExperimentConfig& c) { return c.edges_file.string(); },
              [](ExperimentConfig& c, std::string_view, std::string_view v) { c.edges_file = std::string(trim(v)); }},

        DGC_ENUM("run", "loss", run.loss, parse_loss_kind),
        DGC_NUM("run", "delta", run.delta),
        DGC_NUM("run", "eta", run.eta),
        DGC_ENUM("run", "metric", run.metric, parse_metric_kind),
        Field{"run", "metric_matrix", [](const ExperimentConfig& c) { return list_text(c.run.metric_matrix); },
              [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.run.metric_matrix = to_list(k, v); }},
        DGC_NUM("run", "rho", run.rho),
        DGC_SIZE("run", "B", run.B),
        DGC_SIZE("run", "T", run.T),
        DGC_SIZE("run", "K", run.K),
        Field{"run", "alpha",
              [](const ExperimentConfig& c) {
                  if (c.run.alpha.rule == StepRule::explicit_value) return format_number(c.run.alpha.value);
                  return std::string(to_string(c.run.alpha.rule));
              },
              [](ExperimentConfig& c, std::string_view k, std::string_view v) {
                  v = trim(v);
                  if (v == "auto_theorem1" || v == "theorem1") {
                      c.run.alpha = {StepRule::theorem1, 0.0};
                  } else if (v == "auto_experimental" || v == "experimental") {
                      c.run.alpha = {StepRule::experimental, 0.0};
                  } else {
                      c.run.alpha = {StepRule::explicit_value, to_double(k, v)};
                  }
              }},
        DGC_ENUM("run", "init", run.init, parse_init_scheme),
        DGC_U64("run", "seed", run.seed),
        DGC_ENUM("run", "weights", run.weights, parse_weight_convention),
        DGC_ENUM("run", "mode", run.mode, parse_execution_mode),
        DGC_SIZE("run", "threads", run.threads),
        DGC_ENUM("run", "kernels", run.kernels, simd::parse_isa),
        DGC_NUM("run", "early_stop_tolerance", run.early_stop_tolerance),
        DGC_ENUM("run", "evaluation", run.evaluation, parse_evaluation_scope),

        DGC_ENUM("sweep", "parameter", sweep.parameter, parse_sweep),
        Field{"sweep", "values", [](const ExperimentConfig& c) { return list_text(c.sweep.values); },
              [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.sweep.values = to_list(k, v); }},

        DGC_SIZE("experiment", "repeats", repeats),
        Field{"experiment", "output_dir", [](const ExperimentConfig& c) { return c.output_dir.string(); },
              [](ExperimentConfig& c, std::string_view, std::string_view v) { c.output_dir = std::string(trim(v)); }},
    };
    return table;
}

#undef DGC_NUM
#undef DGC_SIZE
#undef DGC_U64
#undef DGC_ENUM

}  // namespace

void set_field(ExperimentConfig& config, std::string_view key, std::string_view value) {
    for (const Field& f : fields()) {
        std::string full = std::string(f.section) + "." + f.key;
        if (full == key) {
            f.set(config, full, value);
            return;
        }
    }
    fail(ErrorKind::InvalidSpec, "unknown config key '" + std::string(key) + "'");
}

void apply_override(ExperimentConfig& config, std::string_view assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string_view::npos)
        fail(ErrorKind::InvalidSpec, "override '" + std::string(assignment) + "' is not key=value");
    set_field(config, trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

ExperimentConfig parse_config(std::string_view text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in{std::string(text)};
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        fail(ErrorKind::InvalidSpec, "config line " + std::to_string(e.line()) + ": " + e.message());
    }
    ExperimentConfig config;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            fail(ErrorKind::InvalidSpec, "config key '" + section + "' must be inside a [section]");
        for (const auto& [key, node] : body) set_field(config, section + "." + key, node.data());
    }
    config.validate();
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::IoError, "cannot open config " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    ExperimentConfig c = parse_config(buf.str());
    auto anchor = [&](std::filesystem::path& p) {
        if (!p.empty() && p.is_relative()) p = (path.parent_path() / p).lexically_normal();
    };
    anchor(c.dataset.path);
    anchor(c.edges_file);
    return c;
}

std::string serialize_config(const ExperimentConfig& config) {
    std::string out;
    std::string section;
    for (const Field& f : fields()) {
        if (section != f.section) {
            if (!section.empty()) out += '\n';
            section = f.section;
            out += "[" + section + "]\n";
        }
        out += std::string(f.key) + " = " + f.get(config) + "\n";
    }
    return out;
}

void ExperimentConfig::validate() const {
    auto need = [](bool ok, const std::string& what) { require(ok, ErrorKind::InvalidSpec, what); };
    need(repeats >= 1, "experiment.repeats must be >= 1");
    need(m >= 1, "partition.m must be >= 1");
    need(classes_min >= 1 && classes_min <= classes_max, "partition.classes_min must be in [1, classes_max]");
    need(run.rho >= 1.0, "run.rho must be >= 1");
    need(run.B >= 1, "run.B must be >= 1");
    need(run.T >= 1, "run.T must be >= 1");
    need(run.K >= 1, "run.K must be >= 1");
    need(run.alpha.rule != StepRule::explicit_value || run.alpha.value > 0.0, "run.alpha must be > 0");
    need(run.delta > 0.0, "run.delta must be > 0");
    need(run.eta > 0.0, "run.eta must be > 0");
    need(run.init != InitScheme::explicit_centers, "run.init = explicit has no file form");
    for (double v : sweep.values) need(v > 0.0, "sweep.values must be positive");
    need(sweep.parameter == SweepParameter::none || !sweep.values.empty(), "sweep.values is empty");
    if (sweep.parameter == SweepParameter::rho)
        for (double v : sweep.values) need(v >= 1.0, "rho sweep values must be >= 1");
    if (dataset.source == DatasetSource::synthetic) {
        need(dataset.means.size() == dataset.components * dataset.dim,
             "dataset.means must hold components x dim values");
        need(dataset.variance > 0.0, "dataset.variance must be > 0");
    }
    if (outlier.enabled) {
        need(outlier.fraction >= 0.0 && outlier.fraction < 1.0, "outlier.fraction must be in [0, 1)");
        need(outlier.noise_variance > 0.0, "outlier.noise_variance must be > 0");
    }
}

RunConfig ExperimentConfig::run_config(std::size_t repeat) const {
    RunConfig c;
    c.rho = run.rho;
    c.B = run.B;
    c.T = run.T;
    c.K = run.K;
    c.alpha = run.alpha;
    c.init.scheme = run.init;
    c.loss.kind = run.loss;
    c.loss.delta = run.delta;
    c.loss.eta = run.eta;
    if (run.metric == MetricKind::mahalanobis) {
        std::size_t d = 0;
        while (d * d < run.metric_matrix.size()) ++d;
        require(d * d == run.metric_matrix.size() && d > 0, ErrorKind::InvalidSpec,
                "run.metric_matrix must hold d x d values");
        c.loss.metric = MetricSpec::mahalanobis(run.metric_matrix, d);
    }
    c.seed = run.seed + repeat;
    c.weights = run.weights;
    c.mode = run.mode;
    c.threads = run.threads;
    c.kernels = run.kernels;
    c.early_stop_tolerance = run.early_stop_tolerance;
    return c;
}

PartitionSpec ExperimentConfig::partition_spec(std::size_t repeat) const {
    PartitionSpec p;
    p.scheme = partition;
    p.classes_min = classes_min;
    p.classes_max = classes_max;
    p.seed = partition_seed + repeat;
    return p;
}

TopologySpec ExperimentConfig::topology_spec() const {
    TopologySpec t;
    t.kind = topology;
    t.m = m;
    t.p = edge_probability;
    t.seed = topology_seed;
    if (topology == TopologyKind::custom) {
        require(!edges_file.empty(), ErrorKind::InvalidSpec, "custom topology needs topology.edges_file");
        t.edges = read_edge_list(edges_file);
    }
    return t;
}

}  // namespace dgc
