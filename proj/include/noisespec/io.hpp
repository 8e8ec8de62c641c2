#ifndef NOISESPEC_IO_HPP
#define NOISESPEC_IO_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
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

namespace noisespec {

namespace detail {

inline std::string g17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string g8(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.8g", x);
    return buf;
}

inline std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode);
    if (!out) throw ValidationError("cannot open '" + path + "' for writing");
    return out;
}

inline std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw ValidationError("cannot open '" + path + "' for reading");
    return in;
}

// Little-endian scalar IO, independent of host order.
inline void put_u64(std::ostream& out, std::uint64_t x) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(x >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return x;
}

inline void put_f64(std::ostream& out, double x) { put_u64(out, std::bit_cast<std::uint64_t>(x)); }

inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(line);
    while (std::getline(in, item, ',')) out.push_back(trim(item));
    return out;
}

}  // namespace detail

// ---- trajectory CSV: header "t,<component names...>", one row per sample --

inline void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    auto out = detail::open_out(path);
    out << "t";
    for (Comp c : traj.components) out << "," << component_name(c);
    out << "\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        out << detail::g17(traj.time_of(k));
        for (std::size_t c = 0; c < traj.components.size(); ++c)
            out << "," << detail::g17(traj.data[c][k]);
        out << "\n";
    }
}

inline Trajectory read_trajectory_csv(const std::string& path) {
    auto in = detail::open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
    const auto header = detail::split_csv_line(line);
    if (header.size() < 2 || header[0] != "t")
        throw ValidationError(path + ": expected header 't,<components>'");

    Trajectory traj;
    for (std::size_t i = 1; i < header.size(); ++i)
        traj.components.push_back(parse_component(header[i]));
    traj.data.assign(traj.components.size(), {});

    std::vector<double> times;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        const auto row = detail::split_csv_line(line);
        if (row.size() != header.size())
            throw ValidationError(path + ": row width mismatch");
        times.push_back(detail::parse_double(path, row[0]));
        for (std::size_t i = 1; i < row.size(); ++i)
            traj.data[i - 1].push_back(detail::parse_double(path, row[i]));
    }
    if (times.size() < 2) throw ValidationError(path + ": need at least 2 samples");
    traj.dt_record = times[1] - times[0];
    traj.t0 = times[0] - traj.dt_record;
    return traj;
}

// ---- trajectory binary: path header + component metadata + samples -------

inline constexpr char kTrajMagic[8] = {'N', 'S', 'T', 'R', 'A', 'J', '0', '1'};

inline void write_trajectory_binary(const std::string& path, const Trajectory& traj) {
    auto out = detail::open_out(path, std::ios::binary);
    out.write(kTrajMagic, 8);
    detail::put_f64(out, traj.dt_record);
    detail::put_f64(out, traj.t0);
    detail::put_u64(out, traj.size());
    detail::put_u64(out, traj.master_seed);
    detail::put_u64(out, traj.trajectory_index);
    detail::put_u64(out, traj.components.size());
    for (Comp c : traj.components) {
        const auto name = component_name(c);
        out.put(static_cast<char>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
    }
    for (const auto& series : traj.data)
        for (double x : series) detail::put_f64(out, x);
}

inline Trajectory read_trajectory_binary(const std::string& path) {
    auto in = detail::open_in(path, std::ios::binary);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kTrajMagic, 8) != 0)
        throw ValidationError(path + ": not a trajectory file");
    Trajectory traj;
    traj.dt_record = detail::get_f64(in);
    traj.t0 = detail::get_f64(in);
    const std::uint64_t n = detail::get_u64(in);
    traj.master_seed = detail::get_u64(in);
    traj.trajectory_index = detail::get_u64(in);
    const std::uint64_t n_comp = detail::get_u64(in);
    for (std::uint64_t i = 0; i < n_comp; ++i) {
        const int len = in.get();
        std::string name(static_cast<std::size_t>(len), '\0');
        in.read(name.data(), len);
        traj.components.push_back(parse_component(name));
    }
    traj.data.assign(traj.components.size(), std::vector<double>(n));
    for (auto& series : traj.data)
        for (auto& x : series) x = detail::get_f64(in);
    if (!in) throw ValidationError(path + ": truncated trajectory file");
    return traj;
}

// ---- noise path binary: magic, dt, n_steps, seed, trajectory, samples ----

inline constexpr char kPathMagic[8] = {'N', 'S', 'P', 'A', 'T', 'H', '0', '1'};

inline void write_noise_path(const std::string& path, const NoisePath& np) {
    auto out = detail::open_out(path, std::ios::binary);
    out.write(kPathMagic, 8);
    detail::put_f64(out, np.dt);
    detail::put_u64(out, np.samples.size());
    detail::put_u64(out, np.master_seed);
    detail::put_u64(out, np.trajectory);
    for (const auto& b : np.samples) {
        detail::put_f64(out, b.eps1);
        detail::put_f64(out, b.eps2);
    }
}

inline NoisePath read_noise_path(const std::string& path) {
    auto in = detail::open_in(path, std::ios::binary);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kPathMagic, 8) != 0)
        throw ValidationError(path + ": not a noise path file");
    NoisePath np;
    np.dt = detail::get_f64(in);
    const std::uint64_t n = detail::get_u64(in);
    np.master_seed = detail::get_u64(in);
    np.trajectory = detail::get_u64(in);
    np.samples.resize(n);
    for (auto& b : np.samples) {
        b.eps1 = detail::get_f64(in);
        b.eps2 = detail::get_f64(in);
    }
    if (!in) throw ValidationError(path + ": truncated noise path file");
    return np;
}

// ---- spectrum CSV: "nu,omega,psd" with metadata comments ------------------

inline void write_spectrum_csv(const std::string& path, const Spectrum& s) {
    auto out = detail::open_out(path);
    out << "# component = " << s.component << "\n";
    out << "# dt_record = " << detail::g17(s.dt_record) << "\n";
    out << "# segment_length = " << s.segment_length << "\n";
    out << "# window = " << window_name(s.window) << "\n";
    out << "# ensemble_size = " << s.ensemble_size << "\n";
    out << "# n_segments = " << s.n_segments << "\n";
    out << "nu,omega,psd\n";
    for (std::size_t k = 0; k < s.psd.size(); ++k)
        out << detail::g17(s.frequencies[k]) << ","
            << detail::g17(2.0 * std::numbers::pi * s.frequencies[k]) << ","
            << detail::g17(s.psd[k]) << "\n";
}

inline Spectrum read_spectrum_csv(const std::string& path) {
    auto in = detail::open_in(path);
    Spectrum s;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq != std::string::npos) {
                const std::string key = detail::trim(line.substr(1, eq - 1));
                const std::string value = detail::trim(line.substr(eq + 1));
                if (key == "component") s.component = value;
                else if (key == "dt_record") s.dt_record = detail::parse_double(key, value);
                else if (key == "segment_length")
                    s.segment_length = static_cast<std::size_t>(detail::parse_int(key, value));
                else if (key == "window") s.window = parse_window(value);
                else if (key == "ensemble_size")
                    s.ensemble_size = static_cast<int>(detail::parse_int(key, value));
                else if (key == "n_segments") s.n_segments = detail::parse_int(key, value);
            }
            continue;
        }
        if (!header_seen) {
            if (line != "nu,omega,psd")
                throw ValidationError(path + ": expected header 'nu,omega,psd'");
            header_seen = true;
            continue;
        }
        const auto row = detail::split_csv_line(line);
        if (row.size() != 3) throw ValidationError(path + ": row width mismatch");
        s.frequencies.push_back(detail::parse_double(path, row[0]));
        s.psd.push_back(detail::parse_double(path, row[2]));
    }
    if (s.psd.empty()) throw ValidationError(path + ": no spectrum rows");
    return s;
}

// gnuplot-ready two-column plot data.
inline void write_plot_data(const std::string& path, const Spectrum& s) {
    auto out = detail::open_out(path);
    out << "# nu psd (" << s.component << ")\n";
    for (std::size_t k = 0; k < s.psd.size(); ++k)
        out << detail::g8(s.frequencies[k]) << " " << detail::g8(s.psd[k]) << "\n";
}

// ---- analysis outputs ------------------------------------------------------

inline void write_sweep_csv(const std::string& path,
                            const std::vector<CorrelationResult>& sweep) {
    auto out = detail::open_out(path);
    out << "g,r,n,std_error\n";
    for (const auto& c : sweep)
        out << detail::g17(c.g_value) << "," << detail::g17(c.r) << "," << c.n << ","
            << detail::g17(c.std_error) << "\n";
}

inline void write_sweep_plot_data(const std::string& path,
                                  const std::vector<CorrelationResult>& sweep) {
    auto out = detail::open_out(path);
    out << "# g r\n";
    for (const auto& c : sweep)
        out << detail::g8(c.g_value) << " " << detail::g8(c.r) << "\n";
}

inline std::string estimate_report_text(const EstimatedParams& est) {
    std::ostringstream out;
    out << "delta_hat = " << detail::g17(est.delta_hat) << "\n";
    out << "g_hat_magnitude = " << detail::g17(est.g_hat_magnitude) << "\n";
    out << "g_sign = " << coupling_sign_name(est.g_sign) << "\n";
    out << "residual_rms_omega = " << detail::g17(est.residual) << "\n";
    out << "n_peaks_used = " << est.assignment.size() << "\n";
    for (const auto& a : est.assignment)
        out << "assignment.omega" << a.role << " = peak_nu " << detail::g17(a.peak_nu)
            << " -> model_nu " << detail::g17(a.model_nu) << "\n";
    if (std::isfinite(est.identity_residual_1))
        out << "identity_residual_omega1 = " << detail::g17(est.identity_residual_1) << "\n";
    if (std::isfinite(est.identity_residual_4))
        out << "identity_residual_omega4 = " << detail::g17(est.identity_residual_4) << "\n";
    return out.str();
}

inline void write_estimate_report(const std::string& path, const EstimatedParams& est) {
    auto out = detail::open_out(path);
    out << estimate_report_text(est);
}

inline void write_estimate_csv(const std::string& path, const EstimatedParams& est) {
    auto out = detail::open_out(path);
    out << "delta_hat,g_hat_magnitude,g_sign,residual_rms_omega,n_peaks_used\n";
    out << detail::g17(est.delta_hat) << "," << detail::g17(est.g_hat_magnitude) << ","
        << coupling_sign_name(est.g_sign) << "," << detail::g17(est.residual) << ","
        << est.assignment.size() << "\n";
}

}  // namespace noisespec

#endif
