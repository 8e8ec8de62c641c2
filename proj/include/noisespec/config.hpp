#ifndef NOISESPEC_CONFIG_HPP
#define NOISESPEC_CONFIG_HPP

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "noisespec/analysis.hpp"
#include "noisespec/bloch.hpp"
#include "noisespec/detail/text.hpp"
#include "noisespec/errors.hpp"
#include "noisespec/integrate.hpp"
#include "noisespec/noise.hpp"
#include "noisespec/spectral.hpp"
#include "noisespec/types.hpp"
#include "noisespec/version.hpp"

namespace noisespec {

namespace detail {

// "a,b,c" or "start:stop:step" (inclusive stop, half-step tolerance).
inline std::vector<double> parse_grid(const std::string& key, const std::string& value) {
    std::vector<double> grid;
    if (value.find(':') != std::string::npos) {
        const auto parts = split(value, ':');
        if (parts.size() != 3) throw ValidationError(key + ": expected start:stop:step");
        const double start = parse_double(key, parts[0]);
        const double stop = parse_double(key, parts[1]);
        const double step = parse_double(key, parts[2]);
        if (!(step > 0.0)) throw ValidationError(key + ": step must be > 0");
        for (double x = start; x <= stop + 0.5 * step; x += step) grid.push_back(x);
    } else {
        for (const auto& item : split(value, ','))
            if (!item.empty()) grid.push_back(parse_double(key, item));
    }
    if (grid.empty()) throw ValidationError(key + ": empty grid");
    return grid;
}

inline std::string format17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::vector<Comp> parse_components(const std::string& key, const std::string& value) {
    std::vector<Comp> comps;
    if (trim(value) == "all") {
        for (std::size_t i = 0; i < kNumComponents; ++i) comps.push_back(static_cast<Comp>(i));
        return comps;
    }
    for (const auto& name : split(value, ',')) {
        if (name.empty()) continue;
        try {
            comps.push_back(parse_component(name));
        } catch (const ValidationError&) {
            throw ValidationError(key + ": unknown component '" + name + "'");
        }
    }
    if (comps.empty()) throw ValidationError(key + ": empty component list");
    return comps;
}

inline std::string components_to_string(const std::vector<Comp>& comps) {
    std::string out;
    for (std::size_t i = 0; i < comps.size(); ++i) {
        if (i) out += ",";
        out += std::string(component_name(comps[i]));
    }
    return out;
}

}  // namespace detail

// Everything a run needs, assembled from defaults, an optional preset, an
// optional config file and --set overrides, in that order.  Keys use dotted
// sections (system.delta1, noise.d, sim.dt, ...).
struct RunConfig {
    SystemParams system;
    NoiseSpec noise{0.0, 1};
    SimConfig sim;
    std::string initial = "thermal";  // thermal | product:x1,y1,z1;x2,y2,z2

    PsdOptions spectral;
    std::vector<Comp> spectral_components = {c0x, c0z};
    std::vector<double> d_values;  // empty -> {noise.d}

    double peak_floor = 0.01;
    long long max_peaks = 6;
    InvertOptions invert;
    std::vector<double> g_grid;  // empty -> single g correlation

    std::set<std::string> explicit_keys;

    bool was_set(const std::string& key) const { return explicit_keys.count(key) > 0; }

    void set(const std::string& key, const std::string& raw_value) {
        using namespace detail;
        const std::string value = trim(raw_value);
        if (key == "system.delta1") system.delta1 = parse_double(key, value);
        else if (key == "system.delta2") system.delta2 = parse_double(key, value);
        else if (key == "system.g") system.g = parse_double(key, value);
        else if (key == "system.gamma_phi1") system.gamma_phi1 = parse_double(key, value);
        else if (key == "system.gamma_phi2") system.gamma_phi2 = parse_double(key, value);
        else if (key == "system.gamma_r1") system.gamma_r1 = parse_double(key, value);
        else if (key == "system.gamma_r2") system.gamma_r2 = parse_double(key, value);
        else if (key == "system.z_t1") system.z_t1 = parse_double(key, value);
        else if (key == "system.z_t2") system.z_t2 = parse_double(key, value);
        else if (key == "noise.d") noise.intensity_d = parse_double(key, value);
        else if (key == "noise.seed") noise.master_seed = parse_u64(key, value);
        else if (key == "sim.dt") sim.dt = parse_double(key, value);
        else if (key == "sim.t_max") sim.t_max = parse_double(key, value);
        else if (key == "sim.burn_in") sim.burn_in = parse_double(key, value);
        else if (key == "sim.record_stride") sim.record_stride = static_cast<int>(parse_int(key, value));
        else if (key == "sim.n_trajectories") sim.n_trajectories = static_cast<int>(parse_int(key, value));
        else if (key == "sim.components") sim.record = parse_components(key, value);
        else if (key == "sim.initial") initial = value;
        else if (key == "sim.memory_budget_mb")
            sim.memory_budget_bytes = static_cast<std::size_t>(parse_double(key, value) * 1024.0 * 1024.0);
        else if (key == "spectral.segment_length")
            spectral.segment_length = static_cast<std::size_t>(parse_int(key, value));
        else if (key == "spectral.overlap") spectral.overlap = parse_double(key, value);
        else if (key == "spectral.window") spectral.window = parse_window(value);
        else if (key == "spectral.detrend") spectral.detrend = parse_bool(key, value);
        else if (key == "spectral.components") spectral_components = parse_components(key, value);
        else if (key == "spectral.d_values") {
            d_values.clear();
            for (const auto& item : split(value, ','))
                if (!item.empty()) d_values.push_back(parse_double(key, item));
        }
        else if (key == "analysis.peak_floor") peak_floor = parse_double(key, value);
        else if (key == "analysis.max_peaks") max_peaks = parse_int(key, value);
        else if (key == "analysis.rms_tol") invert.rms_tol = parse_double(key, value);
        else if (key == "analysis.merge_tol") invert.merge_tol_nu = parse_double(key, value);
        else if (key == "analysis.g_grid") g_grid = parse_grid(key, value);
        else throw ValidationError("unknown config key '" + key + "'");
        explicit_keys.insert(key);
    }

    // Initial state per the `sim.initial` spec string.
    BlochTensor15 resolve_initial() const {
        if (initial == "thermal") return thermal_state(system);
        if (initial.rfind("product:", 0) == 0) {
            const auto halves = detail::split(initial.substr(8), ';');
            if (halves.size() != 2)
                throw ValidationError("sim.initial: expected product:x1,y1,z1;x2,y2,z2");
            auto vec = [&](const std::string& s) {
                const auto xs = detail::split(s, ',');
                if (xs.size() != 3)
                    throw ValidationError("sim.initial: expected three components per qubit");
                return std::array<double, 3>{detail::parse_double("sim.initial", xs[0]),
                                             detail::parse_double("sim.initial", xs[1]),
                                             detail::parse_double("sim.initial", xs[2])};
            };
            return product_state(vec(halves[0]), vec(halves[1]));
        }
        throw ValidationError("sim.initial: unknown initial state '" + initial + "'");
    }

    // Normalize the energy unit so delta1 == 1: energies and D divide by
    // delta1, times multiply.  No-op for already-dimensionless configs.
    void normalize_units() {
        const double s = system.delta1;
        if (s == 1.0) return;
        system = system.normalized();
        noise.intensity_d /= s;
        sim.dt *= s;
        sim.t_max *= s;
        sim.burn_in *= s;
    }

    void validate() const {
        system.validate();
        noise.validate();
        sim.validate();
        spectral.validate();
        if (peak_floor < 0.0) throw ValidationError("analysis.peak_floor: must be >= 0");
        if (max_peaks < 1) throw ValidationError("analysis.max_peaks: must be >= 1");
        if (invert.rms_tol <= 0.0) throw ValidationError("analysis.rms_tol: must be > 0");
        resolve_initial();
        for (double d : d_values)
            if (!(d >= 0.0)) throw ValidationError("spectral.d_values: must be >= 0");
    }

    std::vector<double> resolved_d_values() const {
        return d_values.empty() ? std::vector<double>{noise.intensity_d} : d_values;
    }

    // Serialized form; loadable back with from_kv_file, which makes emitted
    // manifests replayable configs.
    std::string serialize() const {
        using detail::format17;
        std::ostringstream out;
        out << "system.delta1 = " << format17(system.delta1) << "\n";
        out << "system.delta2 = " << format17(system.delta2) << "\n";
        out << "system.g = " << format17(system.g) << "\n";
        out << "system.gamma_phi1 = " << format17(system.gamma_phi1) << "\n";
        out << "system.gamma_phi2 = " << format17(system.gamma_phi2) << "\n";
        out << "system.gamma_r1 = " << format17(system.gamma_r1) << "\n";
        out << "system.gamma_r2 = " << format17(system.gamma_r2) << "\n";
        out << "system.z_t1 = " << format17(system.z_t1) << "\n";
        out << "system.z_t2 = " << format17(system.z_t2) << "\n";
        out << "noise.d = " << format17(noise.intensity_d) << "\n";
        out << "noise.seed = " << noise.master_seed << "\n";
        out << "sim.dt = " << format17(sim.dt) << "\n";
        out << "sim.t_max = " << format17(sim.t_max) << "\n";
        out << "sim.burn_in = " << format17(sim.burn_in) << "\n";
        out << "sim.record_stride = " << sim.record_stride << "\n";
        out << "sim.n_trajectories = " << sim.n_trajectories << "\n";
        out << "sim.components = " << detail::components_to_string(sim.record) << "\n";
        out << "sim.initial = " << initial << "\n";
        out << "sim.memory_budget_mb = "
            << format17(static_cast<double>(sim.memory_budget_bytes) / (1024.0 * 1024.0)) << "\n";
        out << "spectral.segment_length = " << spectral.segment_length << "\n";
        out << "spectral.overlap = " << format17(spectral.overlap) << "\n";
        out << "spectral.window = " << window_name(spectral.window) << "\n";
        out << "spectral.detrend = " << (spectral.detrend ? "true" : "false") << "\n";
        out << "spectral.components = " << detail::components_to_string(spectral_components) << "\n";
        if (!d_values.empty()) {
            out << "spectral.d_values = ";
            for (std::size_t i = 0; i < d_values.size(); ++i)
                out << (i ? "," : "") << format17(d_values[i]);
            out << "\n";
        }
        out << "analysis.peak_floor = " << format17(peak_floor) << "\n";
        out << "analysis.max_peaks = " << max_peaks << "\n";
        out << "analysis.rms_tol = " << format17(invert.rms_tol) << "\n";
        out << "analysis.merge_tol = " << format17(invert.merge_tol_nu) << "\n";
        if (!g_grid.empty()) {
            out << "analysis.g_grid = ";
            for (std::size_t i = 0; i < g_grid.size(); ++i)
                out << (i ? "," : "") << format17(g_grid[i]);
            out << "\n";
        }
        return out.str();
    }
};

// Parse `key = value` lines; '#' starts a comment, blank lines are skipped.
inline void apply_kv_text(RunConfig& cfg, const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError(origin + ":" + std::to_string(lineno) +
                                  ": expected 'key = value', got '" + line + "'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        try {
            cfg.set(key, value);
        } catch (const ValidationError& e) {
            throw ValidationError(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

inline void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    apply_kv_text(cfg, buf.str(), path);
}

// Presets carry exactly the parameter values the reproduced figures use.
inline void apply_preset(RunConfig& cfg, const std::string& name) {
    if (name == "fig2") {
        apply_kv_text(cfg,
                      "system.delta1 = 1\n"
                      "system.delta2 = 1\n"
                      "system.g = 0.5\n"
                      "system.gamma_phi1 = 0.1\n"
                      "system.gamma_phi2 = 0.1\n"
                      "system.gamma_r1 = 0.1\n"
                      "system.gamma_r2 = 0.1\n"
                      "system.z_t1 = 1\n"
                      "system.z_t2 = 1\n"
                      "noise.d = 0.013\n"
                      "spectral.d_values = 0.013,0.04\n",
                      "preset fig2");
    } else if (name == "fig3") {
        apply_kv_text(cfg,
                      "system.delta1 = 1\n"
                      "system.delta2 = 1\n"
                      "system.gamma_phi1 = 0.1\n"
                      "system.gamma_phi2 = 0.1\n"
                      "system.gamma_r1 = 0.1\n"
                      "system.gamma_r2 = 0.1\n"
                      "system.z_t1 = 1\n"
                      "system.z_t2 = 1\n"
                      "noise.d = 0.013\n"
                      "analysis.g_grid = -1.5:1.5:0.1\n",
                      "preset fig3");
    } else {
        throw ValidationError("unknown preset '" + name + "' (available: fig2, fig3)");
    }
}

}  // namespace noisespec

#endif
