#pragma once

// Run configuration: a flat `key = value` text format whose keys are the
// RunConfig field names. Keys starting with "run." are run metadata written
// into manifests and ignored on input, so a manifest can be fed back as a
// config file.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "jcsim/dynamics.hpp"
#include "jcsim/error.hpp"

namespace jcsim::harness {

enum class Measure { Eof, Ln, Qd, Inversion };
enum class Engine { MappedAnalytic, TruncatedMaster };

/// Fock cutoff per mode: engine default (adaptive for the analytic engine,
/// 30 for the master equation), adaptive, or a fixed level.
struct CutoffSetting {
    enum class Mode { EngineDefault, Adaptive, Fixed };
    Mode mode = Mode::EngineDefault;
    std::size_t k = 0;

    static CutoffSetting fixed(std::size_t k) { return {Mode::Fixed, k}; }
    static CutoffSetting adaptive() { return {Mode::Adaptive, 0}; }
};

inline constexpr std::size_t kDefaultDampedCutoff = 30;
/// Poisson tail left out by an adaptive cutoff; stands in for k = infinity.
inline constexpr double kReferenceTail = 1e-12;

struct RunConfig {
    std::vector<double> modes{10.0}; // mean photon number per mode
    double theta = 0.0;
    double tau_max = 10.0;
    double dtau_sample = 0.02;
    double dtau = 0.005; // integrator step (truncated-master only)
    double gamma_tilde = 0.0;
    double gamma_on_tau = 0.0;
    CutoffSetting cutoff;
    std::vector<Measure> measures{Measure::Eof, Measure::Ln};
    Engine engine = Engine::MappedAnalytic;
    IntegrationScheme integrator = IntegrationScheme::InteractionRk4;
    std::string output_path; // CSV path; relative paths resolve against the output directory
};

inline std::string_view to_string(Measure m) {
    switch (m) {
    case Measure::Eof: return "eof";
    case Measure::Ln: return "ln";
    case Measure::Qd: return "qd";
    case Measure::Inversion: return "inversion";
    }
    return "?";
}

inline std::string_view to_string(Engine e) {
    return e == Engine::MappedAnalytic ? "mapped-analytic" : "truncated-master";
}

inline std::string_view to_string(IntegrationScheme s) {
    return s == IntegrationScheme::InteractionRk4 ? "interaction-rk4" : "classic-rk4";
}

inline std::string to_string(const CutoffSetting& c) {
    switch (c.mode) {
    case CutoffSetting::Mode::EngineDefault: return "default";
    case CutoffSetting::Mode::Adaptive: return "adaptive";
    case CutoffSetting::Mode::Fixed: return std::to_string(c.k);
    }
    return "?";
}

namespace detail {

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        const auto item = trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline double parse_double(std::string_view key, std::string_view text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(v))
        throw ConfigInvalid(std::string(key) + ": expected a number, got '" + t + "'");
    return v;
}

inline std::size_t parse_count(std::string_view key, std::string_view text) {
    const std::string t = trim(text);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        throw ConfigInvalid(std::string(key) + ": expected a non-negative integer, got '" + t + "'");
    return v;
}

/// Shortest text that parses back to the same double.
inline std::string format_exact(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

} // namespace detail

inline Measure parse_measure(std::string_view s) {
    for (auto m : {Measure::Eof, Measure::Ln, Measure::Qd, Measure::Inversion})
        if (s == to_string(m)) return m;
    throw ConfigInvalid("measures: unknown measure '" + std::string(s) + "' (eof, ln, qd, inversion)");
}

inline CutoffSetting parse_cutoff(std::string_view s) {
    const std::string t = detail::trim(s);
    if (t == "adaptive") return CutoffSetting::adaptive();
    if (t == "default") return {};
    return CutoffSetting::fixed(detail::parse_count("cutoff", t));
}

/// Sets one field from its textual form. Throws ConfigInvalid on unknown keys
/// or unparsable values.
inline void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
    if (key.starts_with("run.")) return;
    if (key == "modes") {
        cfg.modes.clear();
        for (const auto& item : detail::split_list(value)) cfg.modes.push_back(detail::parse_double(key, item));
    } else if (key == "modes[0]") {
        if (cfg.modes.empty()) cfg.modes.push_back(0.0);
        cfg.modes[0] = detail::parse_double(key, value);
    } else if (key == "theta") {
        cfg.theta = detail::parse_double(key, value);
    } else if (key == "tau_max") {
        cfg.tau_max = detail::parse_double(key, value);
    } else if (key == "dtau_sample") {
        cfg.dtau_sample = detail::parse_double(key, value);
    } else if (key == "dtau") {
        cfg.dtau = detail::parse_double(key, value);
    } else if (key == "gamma_tilde") {
        cfg.gamma_tilde = detail::parse_double(key, value);
    } else if (key == "gamma_on_tau") {
        cfg.gamma_on_tau = detail::parse_double(key, value);
    } else if (key == "cutoff") {
        cfg.cutoff = parse_cutoff(value);
    } else if (key == "measures") {
        cfg.measures.clear();
        for (const auto& item : detail::split_list(value)) cfg.measures.push_back(parse_measure(item));
    } else if (key == "engine") {
        const std::string v = detail::trim(value);
        if (v == "mapped-analytic")
            cfg.engine = Engine::MappedAnalytic;
        else if (v == "truncated-master")
            cfg.engine = Engine::TruncatedMaster;
        else
            throw ConfigInvalid("engine: expected mapped-analytic or truncated-master, got '" + v + "'");
    } else if (key == "integrator") {
        const std::string v = detail::trim(value);
        if (v == "interaction-rk4")
            cfg.integrator = IntegrationScheme::InteractionRk4;
        else if (v == "classic-rk4")
            cfg.integrator = IntegrationScheme::ClassicRk4;
        else
            throw ConfigInvalid("integrator: expected interaction-rk4 or classic-rk4, got '" + v + "'");
    } else if (key == "output_path") {
        cfg.output_path = detail::trim(value);
    } else {
        throw ConfigInvalid("unknown key '" + std::string(key) + "'");
    }
}

/// Applies a `key=value` override.
inline void apply_override(RunConfig& cfg, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos)
        throw ConfigInvalid("override '" + std::string(assignment) + "' is not of the form key=value");
    apply_setting(cfg, detail::trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

/// Parses `key = value` lines on top of `base`; '#' starts a comment.
inline RunConfig parse_config(std::istream& in, RunConfig base = {}) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigInvalid("line " + std::to_string(lineno) + ": expected key = value");
        apply_setting(base, detail::trim(std::string_view(t).substr(0, eq)), std::string_view(t).substr(eq + 1));
    }
    return base;
}

inline RunConfig load_config(const std::string& path, RunConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    return parse_config(in, std::move(base));
}

/// Config fields in file order, each formatted so it parses back exactly.
inline std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg) {
    std::string modes, measures;
    for (std::size_t i = 0; i < cfg.modes.size(); ++i) modes += (i ? "," : "") + detail::format_exact(cfg.modes[i]);
    for (std::size_t i = 0; i < cfg.measures.size(); ++i)
        measures += (i ? "," : "") + std::string(to_string(cfg.measures[i]));
    return {
        {"modes", modes},
        {"theta", detail::format_exact(cfg.theta)},
        {"tau_max", detail::format_exact(cfg.tau_max)},
        {"dtau_sample", detail::format_exact(cfg.dtau_sample)},
        {"dtau", detail::format_exact(cfg.dtau)},
        {"gamma_tilde", detail::format_exact(cfg.gamma_tilde)},
        {"gamma_on_tau", detail::format_exact(cfg.gamma_on_tau)},
        {"cutoff", to_string(cfg.cutoff)},
        {"measures", measures},
        {"engine", std::string(to_string(cfg.engine))},
        {"integrator", std::string(to_string(cfg.integrator))},
        {"output_path", cfg.output_path},
    };
}

/// Throws ConfigInvalid naming the offending field.
inline void validate(const RunConfig& cfg) {
    auto fail = [](const std::string& field, const std::string& why) { throw ConfigInvalid(field + ": " + why); };
    if (cfg.modes.empty()) fail("modes", "at least one mode required");
    for (double n : cfg.modes)
        if (n < 0.0) fail("modes", "mean photon numbers must be >= 0");
    if (cfg.theta < 0.0 || cfg.theta > std::numbers::pi) fail("theta", "must lie in [0, pi]");
    if (!(cfg.tau_max > 0.0)) fail("tau_max", "must be > 0");
    if (!(cfg.dtau_sample > 0.0)) fail("dtau_sample", "must be > 0");
    if (!(cfg.dtau > 0.0)) fail("dtau", "must be > 0");
    if (cfg.gamma_tilde < 0.0) fail("gamma_tilde", "must be >= 0");
    if (cfg.gamma_on_tau < 0.0) fail("gamma_on_tau", "must be >= 0");
    if (cfg.measures.empty()) fail("measures", "at least one measure required");
    for (std::size_t i = 0; i < cfg.measures.size(); ++i)
        for (std::size_t j = i + 1; j < cfg.measures.size(); ++j)
            if (cfg.measures[i] == cfg.measures[j]) fail("measures", "duplicate '" + std::string(to_string(cfg.measures[i])) + "'");

    if (cfg.engine == Engine::MappedAnalytic) {
        if (cfg.gamma_tilde != 0.0) fail("gamma_tilde", "engine mapped-analytic is closed-system; requires gamma_tilde = 0");
        return;
    }
    if (cfg.modes.size() != 1)
        fail("modes", cfg.gamma_tilde > 0.0 ? "damped (gamma_tilde > 0) runs are single-mode only"
                                            : "engine truncated-master is single-mode only");
    if (cfg.cutoff.mode == CutoffSetting::Mode::Fixed && cfg.cutoff.k < 1) fail("cutoff", "must be >= 1 for truncated-master");
    if (cfg.gamma_tilde > 0.0) {
        if (cfg.dtau > kMaxDampedStep) fail("dtau", "must be <= 0.01 for damped runs");
        if (std::find(cfg.measures.begin(), cfg.measures.end(), Measure::Eof) != cfg.measures.end())
            fail("measures", "eof of a mixed 2 x k state is not offered; use ln or qd for damped runs");
    }
}

} // namespace jcsim::harness
