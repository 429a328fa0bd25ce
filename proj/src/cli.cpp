#include "perfou/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "CLI11.hpp"

#include "perfou/config.hpp"
#include "perfou/errors.hpp"
#include "perfou/report.hpp"

namespace perfou {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

void require_estimation_hurst(const AppConfig& cfg, bool clt_range) {
    const double h = cfg.model.hurst.value();
    if (!(h > 0.5) || (clt_range && !(h < 0.75))) {
        throw ConfigError("inadmissible hurst " + std::to_string(h) +
                          (clt_range ? " (need 1/2 < H < 3/4)" : " (need H > 1/2)"));
    }
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

int cmd_simulate(const AppConfig& cfg, const fs::path& out_dir, std::ostream& out) {
    const SamplePath path = simulate_path(cfg.model, cfg.simulation_options());
    auto file = open_out(out_dir / "path.csv");
    write_path_csv(path, file);
    out << "simulate: " << path.x.size() << " rows -> " << (out_dir / "path.csv").string() << '\n';
    return kExitOk;
}

int cmd_estimate(const AppConfig& cfg, const fs::path& out_dir, std::ostream& out) {
    require_estimation_hurst(cfg, false);
    SamplePath path;
    if (cfg.estimate.path.empty()) {
        path = simulate_path(cfg.model, cfg.simulation_options());
    } else {
        std::ifstream in(cfg.estimate.path);
        if (!in) throw IoError("cannot open " + cfg.estimate.path);
        path = path_from_table(read_path_csv(in), cfg.model, cfg.burn_in_steps());
    }

    EstimateOptions options;
    options.mode = cfg.estimate.mode;
    options.trace = cfg.estimate.trace;
    options.cross_check = cfg.estimate.cross_check;
    if (cfg.estimate.correction == CorrectionAlpha::true_alpha) options.alpha_for_correction = cfg.model.alpha;

    try {
        const EstimateResult result = estimate(path, options);
        write_json(estimate_report(path, result), out_dir / "estimate.json");
        out << "estimate:";
        const auto names = component_names(cfg.model);
        for (std::size_t i = 0; i < names.size(); ++i) {
            out << ' ' << names[i] << '=' << fmt(result.theta_hat[static_cast<Eigen::Index>(i)]);
        }
        out << '\n';
        return kExitOk;
    } catch (const DegenerateDesign& e) {
        write_json(degenerate_estimate_report(path, build_design(path), options.mode), out_dir / "estimate.json");
        out << "estimate: DEGENERATE (" << e.what() << ")\n";
        return kExitStudyFail;
    }
}

int cmd_limits(const AppConfig& cfg, const fs::path& out_dir, std::ostream& out) {
    require_estimation_hurst(cfg, false);
    const LimitMatrices limits = limit_matrices(cfg.model);
    write_json(limits_report(cfg.model, limits), out_dir / "limits.json");
    out << "limits: gamma=" << fmt(limits.gamma) << " clt_valid=" << limits.clt_valid
        << " degenerate_limit=" << limits.degenerate_limit << '\n';
    return kExitOk;
}

void write_study(const ExperimentReport& report, const fs::path& out_dir) {
    {
        auto file = open_out(out_dir / "replicates.csv");
        write_replicates_csv(report, file);
    }
    {
        auto file = open_out(out_dir / "qq.csv");
        write_qq_csv(report, file);
    }
    write_json(experiment_report(report), out_dir / (report.kind + ".json"));
}

int cmd_mc(const AppConfig& cfg, const fs::path& out_dir, std::ostream& out, bool clt) {
    require_estimation_hurst(cfg, true);
    McConfig mc = cfg.mc_config();
    try {
        mc.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    ExperimentReport report;
    try {
        report = clt ? run_clt(mc, cfg.mc.thresholds) : run_consistency(mc);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    write_study(report, out_dir);

    out << (report.pass ? "PASS " : "FAIL ") << report.kind;
    if (clt) {
        out << " mu_block_distance=" << fmt(*report.mu_block_distance);
    } else {
        out << " rmse_ratio=";
        const auto& first = report.aggregates.front().rmse;
        const auto& last = report.aggregates.back().rmse;
        out << fmt((last.array() / first.array()).maxCoeff());
    }
    std::size_t excluded = 0;
    for (const auto& a : report.aggregates) excluded += a.excluded;
    out << " excluded=" << excluded << " wall_clock_s=" << fmt(report.wall_clock_seconds) << '\n';
    return report.pass ? kExitOk : kExitStudyFail;
}

int cmd_coupling(const AppConfig& cfg, const fs::path& out_dir, std::ostream& out) {
    const CouplingReport report = run_coupling(cfg.coupling_config());
    {
        auto file = open_out(out_dir / "coupling.csv");
        write_coupling_csv(report, file);
    }
    write_json(coupling_report(report), out_dir / "coupling.json");
    out << (report.pass || report.exact_match ? "PASS" : "FAIL") << " coupling";
    if (report.exact_match) {
        out << " exact_match";
    } else if (report.log_slope) {
        out << " log_slope=" << fmt(*report.log_slope) << " alpha=" << fmt(report.alpha);
    }
    out << '\n';
    return report.pass || report.exact_match ? kExitOk : kExitStudyFail;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Periodic-mean fractional OU toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::vector<std::string> overrides;
    std::size_t workers = 0;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"simulate", "Simulate a path and write path.csv"},
        {"estimate", "Estimate theta from a path file or a fresh simulation"},
        {"limits", "Compute the limit matrices"},
        {"mc-consistency", "Monte Carlo consistency study"},
        {"mc-clt", "Monte Carlo CLT study"},
        {"coupling", "Shared-noise coupling decay"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "Output directory");
        sub->add_option("--set", overrides, "key=value override (repeatable)")->take_all();
        sub->add_option("--workers", workers, "Worker threads for Monte Carlo studies")
            ->check(CLI::PositiveNumber);
    }

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        if (workers > 0) overrides.push_back("workers=" + std::to_string(workers));
        const AppConfig cfg = load_config(config_path, overrides);

        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec || !fs::is_directory(out_dir)) throw IoError("output directory not writable: " + out_dir);

        if (command == "simulate") return cmd_simulate(cfg, out_dir, out);
        if (command == "estimate") return cmd_estimate(cfg, out_dir, out);
        if (command == "limits") return cmd_limits(cfg, out_dir, out);
        if (command == "mc-consistency") return cmd_mc(cfg, out_dir, out, false);
        if (command == "mc-clt") return cmd_mc(cfg, out_dir, out, true);
        return cmd_coupling(cfg, out_dir, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::invalid_argument& e) {
        err << "invalid input: " << e.what() << '\n';
        return kExitConfigError;
    }
}

}  // namespace perfou
