// Command-line front end: simulate, tune, run, compare, report.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tbod/errors.hpp"
#include "tbod/experiment.hpp"
#include "tbod/trajectory_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tbod;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<std::string> mode;
    std::optional<std::size_t> budget;
    std::string gains;
    std::string data;
    std::string from;
};

ExperimentConfig resolve_config(const Options& o) {
    ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_experiment(o.config);
    if (o.seed) {
        cfg.seed = *o.seed;
    }
    if (o.mode) {
        cfg.cost.mode = cost_mode_from(*o.mode);
    }
    if (o.budget) {
        cfg.tune.budget = *o.budget;
    }
    cfg.validate();
    return cfg;
}

fs::path output_dir(const Options& o) {
    if (o.out.empty()) {
        throw InvalidConfig("--out is required");
    }
    std::error_code ec;
    fs::create_directories(o.out, ec);
    if (ec) {
        throw IoError("cannot create " + o.out + ": " + ec.message());
    }
    return o.out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

/// Trajectories of one split, either regenerated from the config or loaded
/// from a directory written by `simulate`.
std::vector<NamedTrajectory> split_data(const ExperimentConfig& cfg, Split split, const Options& o) {
    if (o.data.empty()) {
        return make_split(cfg, split);
    }
    const fs::path dir = o.data;
    json manifest;
    try {
        manifest = json::parse(read_text(dir / "manifest.json"));
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad manifest: ") + e.what());
    }
    const char* key = split == Split::Train ? "train" : "test";
    std::vector<NamedTrajectory> out;
    for (const auto& entry : manifest.at(key)) {
        const std::string id = entry.at("id").get<std::string>();
        out.push_back({id, load_trajectory(dir / entry.at("file").get<std::string>())});
    }
    if (out.empty()) {
        throw InvalidConfig(std::string("manifest lists no ") + key + " trajectories");
    }
    return out;
}

std::optional<GainSet> gains_from_file(const std::string& path) {
    if (path.empty()) {
        return std::nullopt;
    }
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw InvalidConfig("gains file " + path + " is not valid JSON: " + e.what());
    }
    if (j.contains("best_gains")) {
        return gains_from_json(j.at("best_gains"));
    }
    if (j.contains("gains")) {
        return gains_from_json(j.at("gains"));
    }
    return gains_from_json(j);
}

TuneReport run_tune(const ExperimentConfig& cfg, const Options& o, const fs::path& out) {
    const auto train = split_data(cfg, Split::Train, o);
    TuneOptions opts = cfg.tune;
    opts.seed = cfg.seed;
    const TuneReport r = tune(GainSet::heuristic(), trajectories_of(train), cfg.cost, opts);
    write_text(out / "tune_report.json", dump(to_json(r)));
    write_text(out / "gains.json", dump({{"gains", to_json(r.best)}}));
    std::printf("tune: mode=%s evaluations=%zu cost %.6g -> %.6g (%.1f s)\n", to_string(cfg.cost.mode).c_str(),
                r.evaluations, r.initial_cost, r.best_cost, r.wall_time_s);
    std::printf("gains: %.4f %.4f %.4f %.4f %.4f %.4f\n", r.best.k[0], r.best.k[1], r.best.k[2], r.best.k[3],
                r.best.k[4], r.best.k[5]);
    return r;
}

int cmd_simulate(const Options& o) {
    const ExperimentConfig cfg = resolve_config(o);
    const fs::path out = output_dir(o);
    json manifest = {{"config", to_json(cfg)}, {"train", json::array()}, {"test", json::array()}};
    for (Split split : {Split::Train, Split::Test}) {
        const auto set = make_split(cfg, split);
        for (const auto& t : set) {
            const std::string file = t.id + ".csv";
            save_trajectory(t.trajectory, out / file);
            manifest[split == Split::Train ? "train" : "test"].push_back(
                {{"id", t.id}, {"file", file}, {"seed", t.trajectory.meta.seed}});
        }
        std::printf("simulate: %zu %s trajectories\n", set.size(), split == Split::Train ? "train" : "test");
    }
    write_text(out / "manifest.json", dump(manifest));
    return kOk;
}

int cmd_tune(const Options& o) {
    const ExperimentConfig cfg = resolve_config(o);
    run_tune(cfg, o, output_dir(o));
    return kOk;
}

GainSet pick_gains(const ExperimentConfig& cfg, const Options& o, const fs::path& out, bool allow_tune) {
    if (auto g = gains_from_file(o.gains)) {
        return *g;
    }
    if (cfg.gains) {
        return *cfg.gains;
    }
    if (allow_tune) {
        return run_tune(cfg, o, out).best;
    }
    return GainSet::heuristic();
}

int cmd_run(const Options& o) {
    const ExperimentConfig cfg = resolve_config(o);
    const fs::path out = output_dir(o);
    const GainSet gains = pick_gains(cfg, o, out, false);
    const auto test = split_data(cfg, Split::Test, o);
    std::vector<MethodLog> logs;
    for (const auto& t : test) {
        logs.push_back(run_tbod(t, gains, cfg));
    }
    MetricsTable table;
    table.rows.push_back(summarize("TBOD", log_errors(logs)));
    report(table, logs, out);
    std::cout << to_text(table);
    return kOk;
}

int cmd_compare(const Options& o) {
    const ExperimentConfig cfg = resolve_config(o);
    const fs::path out = output_dir(o);
    const GainSet gains = pick_gains(cfg, o, out, true);
    const auto test = split_data(cfg, Split::Test, o);
    const Comparison c = compare(test, gains, cfg);
    std::vector<MethodLog> logs;
    for (const auto& run : c.runs) {
        logs.insert(logs.end(), run.logs.begin(), run.logs.end());
        if (run.failed) {
            std::fprintf(stderr, "compare: %s failed: %s\n", run.method.c_str(), run.failure.c_str());
        }
    }
    report(c.table, logs, out);
    std::cout << to_text(c.table);
    return kOk;
}

int cmd_report(const Options& o) {
    const fs::path out = output_dir(o);
    const fs::path from = o.from.empty() ? out : fs::path(o.from);
    const MetricsTable table = table_from_csv(read_text(from / "metrics.csv"));
    const auto logs = estimate_log_from_csv(read_text(from / "estimates.csv"));
    report(table, logs, out);
    std::cout << to_text(table);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trajectory-based observer design for IMU/UWB rover localization"};
    app.require_subcommand(1);
    Options o;

    auto common = [&o](CLI::App* sub, bool with_tuning) {
        sub->add_option("--config", o.config, "Experiment config (JSON)");
        sub->add_option("--seed", o.seed, "Master seed");
        sub->add_option("--out", o.out, "Output directory")->required();
        if (with_tuning) {
            sub->add_option("--mode", o.mode, "Cost mode")->check(CLI::IsMember({"output_mismatch", "ground_truth"}));
            sub->add_option("--budget", o.budget, "Cost evaluations for tuning")->check(CLI::PositiveNumber);
        }
    };

    auto* simulate_cmd = app.add_subcommand("simulate", "Simulate train and test trajectories");
    common(simulate_cmd, false);

    auto* tune_cmd = app.add_subcommand("tune", "Tune observer gains on the training split");
    common(tune_cmd, true);
    tune_cmd->add_option("--data", o.data, "Directory written by simulate");

    auto* run_cmd = app.add_subcommand("run", "Run the observer on the test split");
    common(run_cmd, true);
    run_cmd->add_option("--gains", o.gains, "Gains JSON (gains.json or tune_report.json)");
    run_cmd->add_option("--data", o.data, "Directory written by simulate");

    auto* compare_cmd = app.add_subcommand("compare", "Compare observer, EKF and particle filters");
    common(compare_cmd, true);
    compare_cmd->add_option("--gains", o.gains, "Gains JSON; tunes first when absent");
    compare_cmd->add_option("--data", o.data, "Directory written by simulate");

    auto* report_cmd = app.add_subcommand("report", "Rebuild tables and plot data from saved results");
    common(report_cmd, false);
    report_cmd->add_option("--from", o.from, "Directory holding metrics.csv and estimates.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        if (*simulate_cmd) {
            return cmd_simulate(o);
        }
        if (*tune_cmd) {
            return cmd_tune(o);
        }
        if (*run_cmd) {
            return cmd_run(o);
        }
        if (*compare_cmd) {
            return cmd_compare(o);
        }
        return cmd_report(o);
    } catch (const InvalidConfig& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    } catch (const FormatError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kRuntimeError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kRuntimeError;
    }
}
