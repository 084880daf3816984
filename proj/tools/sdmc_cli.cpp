#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sdmc/experiments.hpp"

namespace {

enum ExitCode : int {
    kOk = 0,
    kOther = 1,
    kInvalid = 2,
    kBlowUp = 3,
    kCompareGate = 4,
    kIo = 5,
};

struct Overrides {
    std::optional<std::uint64_t> trajectories;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
    std::optional<std::string> mode;
    std::optional<std::string> scheme;
};

void apply(const Overrides& o, sdmc::ExperimentConfig& cfg) {
    if (o.trajectories) cfg.trajectories = *o.trajectories;
    if (o.seed) cfg.seed = *o.seed;
    if (o.workers) cfg.workers = *o.workers;
    if (o.mode) cfg.mode = sdmc::parse_mode(*o.mode);
    if (o.scheme) cfg.scheme = sdmc::parse_scheme(*o.scheme);
}

void add_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--trajectories", o.trajectories, "Number of trajectories")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", o.seed, "Master seed");
    cmd->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--mode", o.mode, "stochastic | oracle | analytic | compare")
        ->check(CLI::IsMember({"stochastic", "oracle", "analytic", "compare"}));
    cmd->add_option("--scheme", o.scheme, "euler_maruyama | exponential_euler")
        ->check(CLI::IsMember({"euler_maruyama", "exponential_euler"}));
}

int execute(const sdmc::ExperimentConfig& cfg, const std::filesystem::path& out_dir, bool quiet) {
    const sdmc::RunResult result = sdmc::run(cfg);
    std::vector<std::filesystem::path> written;
    try {
        written = sdmc::emit_tables(result, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    }
    if (!quiet) {
        std::cout << cfg.name << ": mode=" << sdmc::to_string(cfg.mode) << " trajectories=" << result.trajectories_used
                  << " discarded=" << result.discarded << " wall=" << result.wall_seconds << "s\n";
        for (const auto& p : written) {
            std::cout << "  wrote " << p.string() << '\n';
        }
    }
    if (result.compare) {
        const auto& c = *result.compare;
        std::cout << "compare: worst |dev|/se = " << c.worst_ratio << " (" << c.worst_quantity << " at t=" << c.worst_time
                  << "), max |dev| = " << c.worst_abs_dev << ", gate " << cfg.compare_sigma << ": "
                  << (c.passed ? "PASS" : "FAIL") << '\n';
        if (!c.passed) {
            return kCompareGate;
        }
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic noise-decoupling Monte Carlo for interacting quantum systems"};
    app.require_subcommand(1);

    std::filesystem::path out_dir = "out";
    bool quiet = false;
    Overrides overrides;

    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "Run an experiment described by a JSON config file");
    run_cmd->add_option("config", config_path, "Config file")->required();
    run_cmd->add_option("--out", out_dir, "Output directory");
    run_cmd->add_flag("--quiet", quiet, "Only print the compare summary");
    add_overrides(run_cmd, overrides);

    std::string preset_name;
    bool list = false;
    bool dump = false;
    auto* preset_cmd = app.add_subcommand("preset", "Run a built-in experiment preset");
    preset_cmd->add_option("name", preset_name, "Preset name");
    preset_cmd->add_flag("--list", list, "List preset names");
    preset_cmd->add_flag("--dump-config", dump, "Print the preset config as JSON instead of running it");
    preset_cmd->add_option("--out", out_dir, "Output directory");
    preset_cmd->add_flag("--quiet", quiet, "Only print the compare summary");
    add_overrides(preset_cmd, overrides);

    CLI11_PARSE(app, argc, argv);

    try {
        sdmc::ExperimentConfig cfg;
        if (*run_cmd) {
            cfg = sdmc::load_config_file(config_path);
        } else {
            if (list) {
                for (const auto& name : sdmc::preset_names()) {
                    std::cout << name << '\n';
                }
                return kOk;
            }
            if (preset_name.empty()) {
                std::cerr << "error: preset name required (see --list)\n";
                return kInvalid;
            }
            cfg = sdmc::preset(preset_name);
        }
        apply(overrides, cfg);
        if (dump) {
            std::cout << sdmc::config_to_json(cfg).dump(2) << '\n';
            return kOk;
        }
        return execute(cfg, out_dir, quiet);
    } catch (const sdmc::TrajectoryBlowUp& e) {
        std::cerr << "blow-up: " << e.what() << '\n';
        return kBlowUp;
    } catch (const sdmc::ConfigError& e) {
        std::cerr << "invalid config: " << e.what() << '\n';
        return kInvalid;
    } catch (const sdmc::ValidationError& e) {
        std::cerr << "invalid model: " << e.what() << '\n';
        return kInvalid;
    } catch (const sdmc::DimensionCapExceeded& e) {
        std::cerr << "dimension cap: " << e.what() << '\n';
        return kInvalid;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kOther;
    }
}
