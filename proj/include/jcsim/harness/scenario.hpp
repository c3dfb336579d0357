#pragma once

// Orchestration of one run (config -> series + manifest), parameter sweeps,
// and the figure presets.

#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "jcsim/correlations.hpp"
#include "jcsim/dynamics.hpp"
#include "jcsim/harness/config.hpp"
#include "jcsim/harness/csv.hpp"
#include "jcsim/states.hpp"
#include "jcsim/version.hpp"

namespace jcsim::harness {

struct RunResult {
    CorrelationSeries series;
    Manifest manifest;
    std::vector<std::size_t> cutoffs; // resolved, per mode
    std::size_t discord_stalls = 0;
    std::optional<IntegrationStats> integration;
};

inline std::vector<std::size_t> resolve_cutoffs(const RunConfig& cfg) {
    std::vector<std::size_t> ks;
    for (double nbar : cfg.modes) {
        switch (cfg.cutoff.mode) {
        case CutoffSetting::Mode::Fixed: ks.push_back(cfg.cutoff.k); break;
        case CutoffSetting::Mode::Adaptive: ks.push_back(adaptive_cutoff(std::sqrt(nbar), kReferenceTail)); break;
        case CutoffSetting::Mode::EngineDefault:
            ks.push_back(cfg.engine == Engine::MappedAnalytic ? adaptive_cutoff(std::sqrt(nbar), kReferenceTail)
                                                              : kDefaultDampedCutoff);
            break;
        }
    }
    return ks;
}

/// 0, dtau_sample, 2 dtau_sample, ... <= tau_max (products, not running sums).
inline std::vector<double> sample_grid(double tau_max, double dtau_sample) {
    const auto n = static_cast<std::size_t>(std::floor(tau_max / dtau_sample + 1e-9));
    std::vector<double> grid(n + 1);
    for (std::size_t i = 0; i <= n; ++i) grid[i] = static_cast<double>(i) * dtau_sample;
    return grid;
}

inline CoherentField field_for(const RunConfig& cfg, const std::vector<std::size_t>& cutoffs) {
    CoherentField f;
    for (double nbar : cfg.modes) f.alphas.emplace_back(std::sqrt(nbar), 0.0);
    f.cutoffs = cutoffs;
    return f;
}

namespace detail {

struct MeasureSink {
    const RunConfig& cfg;
    CorrelationSeries& series;
    const DiscordOptions& discord;
    std::size_t stalls = 0;

    void record(double tau, const ComplexMatrix& rho, const BipartiteShape& shape, const auto& eof, const auto& inversion) {
        series.tau.push_back(tau);
        for (std::size_t i = 0; i < cfg.measures.size(); ++i) {
            double v = 0.0;
            switch (cfg.measures[i]) {
            case Measure::Eof: v = eof(); break;
            case Measure::Ln: v = log_negativity(rho, shape); break;
            case Measure::Qd: {
                const DiscordResult d = quantum_discord(rho, shape, discord);
                stalls += d.stalled ? 1 : 0;
                v = d.value;
                break;
            }
            case Measure::Inversion: v = inversion(); break;
            }
            series.columns[i].push_back(v);
        }
    }
};

} // namespace detail

/// Runs one configuration. Throws ConfigInvalid for an invalid config and
/// propagates engine errors.
inline RunResult run_scenario(const RunConfig& cfg, const DiscordOptions& discord = {}) {
    validate(cfg);
    const auto start = std::chrono::steady_clock::now();

    RunResult result;
    result.cutoffs = resolve_cutoffs(cfg);
    result.series.measures = cfg.measures;
    result.series.columns.assign(cfg.measures.size(), {});
    const std::vector<double> grid = sample_grid(cfg.tau_max, cfg.dtau_sample);
    result.series.tau.reserve(grid.size());

    const FieldTensor field = scissor_truncate(field_for(cfg, result.cutoffs));
    detail::MeasureSink sink{cfg, result.series, discord};
    std::size_t field_dim = 0;

    if (cfg.engine == Engine::MappedAnalytic) {
        const AnalyticEvolver evolver(field, cfg.theta);
        const BipartiteShape two_qubit{2, 2};
        for (double tau : grid) {
            const EvolvedBranches branches = evolver.at(tau);
            field_dim = static_cast<std::size_t>(branches.eps_plus.size());
            const MappedPair pair = map_to_two_qubit(branches);
            sink.record(
                tau, pair.rho4, two_qubit, [&] { return eof_pure(pair); },
                [&] { return pair.delta1 * pair.delta1 - pair.delta2 * pair.delta2; });
        }
    } else {
        const PureCompositeState psi0 = initial_composite(AtomState{cfg.theta}, field);
        const BipartiteShape shape = psi0.shape;
        field_dim = shape.dim_f;
        DephasingConfig dc{cfg.gamma_tilde, cfg.gamma_on_tau, cfg.dtau, result.cutoffs.front(), cfg.integrator};
        result.integration = integrate_master_equation(psi0.density(), dc, grid, [&](double tau, const ComplexMatrix& rho) {
            sink.record(
                tau, rho, shape, [&] { return eof_pure(rho, shape); }, [&] { return atomic_inversion(rho, shape); });
        });
    }
    result.discord_stalls = sink.stalls;

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.manifest = config_entries(cfg);
    std::string ks;
    for (std::size_t i = 0; i < result.cutoffs.size(); ++i) ks += (i ? "," : "") + std::to_string(result.cutoffs[i]);
    auto& m = result.manifest;
    m.emplace_back("run.library_version", std::string(kVersion));
    m.emplace_back("run.resolved_cutoff", ks);
    m.emplace_back("run.field_dimension", std::to_string(field_dim));
    m.emplace_back("run.samples", std::to_string(result.series.tau.size()));
    if (result.integration) {
        m.emplace_back("run.integrator_dtau", jcsim::harness::detail::format_exact(cfg.dtau));
        m.emplace_back("run.integrator_steps", std::to_string(result.integration->steps));
        m.emplace_back("run.max_trace_drift", jcsim::harness::detail::format_exact(result.integration->max_trace_drift));
        m.emplace_back("run.min_eigenvalue", jcsim::harness::detail::format_exact(result.integration->min_eigenvalue));
    } else {
        m.emplace_back("run.integrator_dtau", "none");
    }
    m.emplace_back("run.discord_grid", std::to_string(discord.grid) + "x" + std::to_string(discord.grid));
    m.emplace_back("run.discord_stalls", std::to_string(result.discord_stalls));
    m.emplace_back("run.wall_time_s", jcsim::harness::detail::format_exact(wall));
    return result;
}

/// Axis names accepted by sweep().
inline bool is_sweep_axis(std::string_view axis) {
    return axis == "gamma_tilde" || axis == "cutoff" || axis == "modes[0]" || axis == "theta";
}

struct SweepPoint {
    std::string value;
    RunConfig config;
    RunResult result;
};

/// One run per value of `axis`, executed on up to `jobs` threads. Results come
/// back in the order of `values` regardless of completion order. The first
/// error (in value order) is rethrown after every point has finished.
inline std::vector<SweepPoint> sweep(const RunConfig& base, std::string_view axis, const std::vector<std::string>& values,
                                     unsigned jobs = 1, const DiscordOptions& discord = {}) {
    if (!is_sweep_axis(axis))
        throw ConfigInvalid("sweep axis '" + std::string(axis) + "' not one of gamma_tilde, cutoff, modes[0], theta");
    std::vector<SweepPoint> points(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        points[i].value = values[i];
        points[i].config = base;
        apply_setting(points[i].config, axis, values[i]);
        validate(points[i].config);
    }

    std::vector<std::exception_ptr> errors(values.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < points.size(); i = next++) {
            try {
                points[i].result = run_scenario(points[i].config, discord);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(points.size(), 1))));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
        worker();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return points;
}

/// A figure preset: a base config, optionally expanded over a sweep axis.
struct Preset {
    std::string name;
    std::string description;
    RunConfig config;
    std::string axis;                // empty: single run
    std::vector<std::string> values; // sweep values when axis is set
};

inline std::vector<Preset> presets() {
    std::vector<Preset> out;
    const std::vector<std::string> dephasing{"0", "0.2", "0.5", "1.0"};

    RunConfig fig1;
    fig1.modes = {10.0};
    fig1.measures = {Measure::Eof, Measure::Ln};
    fig1.tau_max = 10.0;
    out.push_back({"fig1", "single mode nbar=10: EOF and LN of the mapped pure state", fig1, "", {}});

    RunConfig fig2 = fig1;
    fig2.modes = {10.0, 10.0};
    fig2.dtau_sample = 0.005;
    out.push_back({"fig2", "two modes nbar=10,10: EOF and LN of the mapped pure state", fig2, "", {}});

    RunConfig fig3 = fig1;
    fig3.measures = {Measure::Eof};
    out.push_back({"fig3", "EOF for truncated inputs k=12,16,20 against the adaptive (k->infinity) reference", fig3,
                   "cutoff", {"12", "16", "20", "adaptive"}});

    RunConfig damped;
    damped.engine = Engine::TruncatedMaster;
    damped.modes = {10.0};
    damped.cutoff = CutoffSetting::fixed(kDefaultDampedCutoff);
    damped.measures = {Measure::Ln, Measure::Qd};
    damped.tau_max = 20.0;
    damped.dtau_sample = 0.2;
    out.push_back({"fig4", "LN and QD under atomic dephasing from tau=0", damped, "gamma_tilde", dephasing});

    RunConfig delayed = damped;
    delayed.gamma_on_tau = 2.0;
    out.push_back({"fig5", "LN and QD with dephasing switched on at tau=2", delayed, "gamma_tilde", dephasing});
    out.push_back({"fig6", "LN and QD, undamped vs gamma=1 switched on at tau=2", delayed, "gamma_tilde", {"0", "1.0"}});

    RunConfig rabi = damped;
    rabi.measures = {Measure::Inversion};
    rabi.tau_max = 30.0;
    rabi.dtau_sample = 0.02;
    out.push_back({"fig7", "atomic inversion collapse and revival under dephasing", rabi, "gamma_tilde", dephasing});

    for (auto& p : out) p.config.output_path = p.name + ".csv";
    return out;
}

inline std::optional<Preset> find_preset(std::string_view name) {
    for (auto& p : presets())
        if (p.name == name) return p;
    return std::nullopt;
}

/// Where a run's CSV goes: output_path (or `<stem>.csv`) under `out_dir` unless absolute.
inline std::filesystem::path csv_path(const RunConfig& cfg, const std::filesystem::path& out_dir, const std::string& stem) {
    const std::filesystem::path p = cfg.output_path.empty() ? std::filesystem::path(stem + ".csv") : std::filesystem::path(cfg.output_path);
    return p.is_absolute() ? p : out_dir / p;
}

inline std::filesystem::path manifest_path(const std::filesystem::path& csv) {
    std::filesystem::path m = csv;
    m.replace_extension(".manifest");
    return m;
}

/// File-name-safe label for a sweep point, e.g. "gamma_tilde-0.5".
inline std::string point_label(std::string_view axis, std::string_view value) {
    std::string label = axis == "modes[0]" ? "nbar0" : std::string(axis);
    label += '-';
    for (char c : value) label += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-') ? c : '_';
    return label;
}

struct WrittenFiles {
    std::vector<std::filesystem::path> csv;
    std::vector<std::filesystem::path> manifests;
    std::size_t discord_stalls = 0;
};

inline WrittenFiles write_run(const RunResult& r, const std::filesystem::path& csv) {
    emit_csv(r.series, csv);
    emit_manifest(r.manifest, manifest_path(csv));
    return {{csv}, {manifest_path(csv)}, r.discord_stalls};
}

/// Writes one CSV + manifest per point, plus the combined long-format CSV at `combined`.
inline WrittenFiles write_sweep(const std::vector<SweepPoint>& points, std::string_view axis,
                                const std::filesystem::path& combined) {
    WrittenFiles files;
    std::vector<std::pair<std::string, CorrelationSeries>> long_rows;
    const std::filesystem::path stem = combined.parent_path() / combined.stem();
    for (const auto& p : points) {
        const std::filesystem::path csv = stem.string() + "." + point_label(axis, p.value) + ".csv";
        auto w = write_run(p.result, csv);
        files.csv.push_back(csv);
        files.manifests.push_back(w.manifests.front());
        files.discord_stalls += w.discord_stalls;
        long_rows.emplace_back(p.value, p.result.series);
    }
    emit_long_csv(std::string(axis), long_rows, combined);
    files.csv.push_back(combined);
    return files;
}

} // namespace jcsim::harness
