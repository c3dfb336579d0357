// jcsim: run a figure preset or config file, optionally as a parameter
// sweep, and write CSV series with run manifests.
//
//   jcsim simulate <preset|--config path> [--override key=value]... [--jobs n] [--out dir]
//   jcsim sweep --axis <name> --values v1,v2,... <preset|--config path> [...]
//   jcsim presets
//
// Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jcsim/harness/scenario.hpp"

namespace {

namespace fs = std::filesystem;
using namespace jcsim::harness;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;
constexpr const char* kOutDirEnv = "JCSIM_OUT_DIR";

struct CommonOptions {
    std::string target;
    std::string config_path;
    std::vector<std::string> overrides;
    unsigned jobs = 1;
    std::string out_dir;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("preset", o.target, "figure preset (fig1 ... fig7)");
    cmd->add_option("--config", o.config_path, "flat key = value config file")->check(CLI::ExistingFile);
    cmd->add_option("--override", o.overrides, "key=value, applied after the config file")->allow_extra_args(false);
    cmd->add_option("--jobs", o.jobs, "concurrent sweep points")->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out_dir, std::string("output directory (default $") + kOutDirEnv + " or .)");
}

struct Resolved {
    RunConfig config;
    std::string stem;
    std::string axis;
    std::vector<std::string> values;
};

Resolved resolve(const CommonOptions& o) {
    if (o.target.empty() && o.config_path.empty()) throw jcsim::ConfigInvalid("give a preset name or --config path");
    Resolved r;
    if (!o.target.empty()) {
        auto preset = find_preset(o.target);
        if (!preset) throw jcsim::ConfigInvalid("unknown preset '" + o.target + "' (see `jcsim presets`)");
        r.config = preset->config;
        r.stem = preset->name;
        r.axis = preset->axis;
        r.values = preset->values;
    }
    if (!o.config_path.empty()) {
        r.config = load_config(o.config_path, r.config);
        if (r.stem.empty()) r.stem = fs::path(o.config_path).stem().string();
    }
    for (const auto& ov : o.overrides) apply_override(r.config, ov);
    return r;
}

fs::path output_dir(const CommonOptions& o) {
    if (!o.out_dir.empty()) return o.out_dir;
    if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
    return ".";
}

int report(const WrittenFiles& files) {
    for (const auto& p : files.csv) std::cout << "wrote " << p.string() << '\n';
    if (files.discord_stalls > 0) {
        std::cerr << "warning: discord refinement stalled at " << files.discord_stalls
                  << " sample(s); best grid values were used\n";
        return kExitNumerical;
    }
    return 0;
}

int run(const Resolved& r, const CommonOptions& o) {
    const fs::path out = output_dir(o);
    const fs::path csv = csv_path(r.config, out, r.stem);
    if (r.axis.empty()) return report(write_run(run_scenario(r.config), csv));

    if (r.values.empty()) {
        std::cerr << "warning: sweep over " << r.axis << " has no values; nothing written\n";
        return 0;
    }
    jcsim::DiscordOptions discord;
    if (o.jobs > 1) discord.threads = 1;
    return report(write_sweep(sweep(r.config, r.axis, r.values, o.jobs, discord), r.axis, csv));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Atom-field correlation dynamics in a generalized Jaynes-Cummings model"};
    app.require_subcommand(1);

    CommonOptions sim_opts;
    auto* simulate = app.add_subcommand("simulate", "run a preset or config file");
    add_common(simulate, sim_opts);

    CommonOptions sweep_opts;
    std::string axis, values;
    auto* sweep_cmd = app.add_subcommand("sweep", "run one series per value of a parameter");
    add_common(sweep_cmd, sweep_opts);
    sweep_cmd->add_option("--axis", axis, "gamma_tilde | cutoff | modes[0] | theta")->required();
    sweep_cmd->add_option("--values", values, "comma-separated values")->required();

    auto* list = app.add_subcommand("presets", "list figure presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (list->parsed()) {
            for (const auto& p : presets()) {
                std::cout << p.name << "  " << p.description;
                if (!p.axis.empty()) std::cout << "  [" << p.axis << ": " << CLI::detail::join(p.values, ",") << "]";
                std::cout << '\n';
            }
            return 0;
        }
        if (simulate->parsed()) return run(resolve(sim_opts), sim_opts);

        Resolved r = resolve(sweep_opts);
        r.axis = axis;
        r.values.clear();
        std::string item;
        for (char c : values + ",") {
            if (c == ',') {
                if (!item.empty()) r.values.push_back(item);
                item.clear();
            } else if (c != ' ') {
                item += c;
            }
        }
        if (!is_sweep_axis(r.axis)) throw jcsim::ConfigInvalid("--axis must be one of gamma_tilde, cutoff, modes[0], theta");
        return run(r, sweep_opts);
    } catch (const jcsim::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        switch (e.kind()) {
        case jcsim::ErrorKind::Config: return kExitConfig;
        case jcsim::ErrorKind::Io: return kExitIo;
        case jcsim::ErrorKind::Numerical: return kExitNumerical;
        }
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitNumerical;
}
