#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "dgc/config.hpp"
#include "dgc/error.hpp"
#include "dgc/experiment.hpp"
#include "dgc/selftest.hpp"

namespace {

int exit_code(dgc::ErrorKind kind) {
    using dgc::ErrorKind;
    switch (kind) {
        case ErrorKind::NonFiniteState:
        case ErrorKind::NoConvergence:
            return 3;
        case ErrorKind::IoError:
        case ErrorKind::ParseError:
        case ErrorKind::EmptyFile:
        case ErrorKind::RaggedRows:
            return 4;
        default:
            return 2;
    }
}

dgc::ExperimentConfig load(const std::string& path, const std::vector<std::string>& overrides) {
    dgc::ExperimentConfig c = dgc::load_config(path);
    for (const auto& o : overrides) dgc::apply_override(c, o);
    c.validate();
    return c;
}

std::string brief(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

void print_row(const dgc::SummaryRow& r) {
    std::cout << (r.sweep_value ? brief(*r.sweep_value) : std::string("-")) << "  acc " << brief(r.acc_mean) << " +- "
              << brief(r.acc_std) << "  ari " << brief(r.ari_mean) << "  gap " << brief(r.gap_mean) << "  J_rho "
              << brief(r.jrho_mean) << "  stable after " << brief(r.stability_round_mean) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributed gradient clustering experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string output;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "experiment config (INI)")->required();
        sub->add_option("--set", overrides, "override, section.key=value")->take_all();
        sub->add_option("-o,--output", output, "output directory (overrides config and DGC_OUTPUT_DIR)");
    };
    auto* run = app.add_subcommand("run", "run the configured experiment");
    add_common(run);
    auto* sweep = app.add_subcommand("sweep", "run once per swept value");
    add_common(sweep);
    auto* outlier = app.add_subcommand("outlier-demo", "k-means vs huber on outlier-injected data");
    add_common(outlier);
    auto* show = app.add_subcommand("config", "print the canonical form of a config");
    show->add_option("config", config_path, "experiment config (INI)")->required();
    show->add_option("--set", overrides, "override, section.key=value")->take_all();
    auto* selftest = app.add_subcommand("selftest", "run invariant checks on built-in fixtures");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (selftest->parsed()) {
            bool ok = true;
            for (const auto& r : dgc::run_selftest()) {
                std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
                ok = ok && r.passed;
            }
            return ok ? 0 : 3;
        }
        dgc::ExperimentConfig config = load(config_path, overrides);
        if (show->parsed()) {
            std::cout << dgc::serialize_config(config);
            return 0;
        }
        if (config.run.metric == dgc::MetricKind::mahalanobis)
            std::cerr << "dgclust: warning: mahalanobis metric is outside the euclidean consensus guarantees\n";
        std::filesystem::path out = output.empty() ? dgc::resolve_output_dir(config) : std::filesystem::path(output);
        if (run->parsed()) {
            print_row(dgc::cmd_run(config, out));
        } else if (sweep->parsed()) {
            for (const auto& r : dgc::cmd_sweep(config, out)) print_row(r);
        } else if (outlier->parsed()) {
            auto report = dgc::cmd_outlier_demo(config, out);
            for (const auto& m : report.methods) {
                std::cout << m.method << ": verdict " << (m.verdict ? "true" : "false") << "\n";
                for (std::size_t k = 0; k < m.distance_to_good.size(); ++k)
                    std::cout << "  center " << k << "  to good " << brief(m.distance_to_good[k])
                              << "  to outlier " << brief(m.distance_to_outlier[k]) << "\n";
            }
        }
        std::cout << "output: " << out.string() << "\n";
        return 0;
    } catch (const dgc::Error& e) {
        std::cerr << "dgclust: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "dgclust: " << e.what() << "\n";
        return 4;
    }
}
