// Command-line front end: simulate | spectrum | estimate | correlate |
// noise-check.  Configuration comes from defaults, then --preset, then
// --config, then --set key=value overrides; every run writes a manifest that
// can be replayed with --config.
#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "noisespec/analysis.hpp"
#include "noisespec/config.hpp"
#include "noisespec/integrate.hpp"
#include "noisespec/io.hpp"
#include "noisespec/model.hpp"
#include "noisespec/noise.hpp"
#include "noisespec/spectral.hpp"
#include "noisespec/version.hpp"

namespace fs = std::filesystem;
using namespace noisespec;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitInsufficient = 4;

struct CommonOpts {
    std::string config_path;
    std::string preset;
    std::string out_dir = "out";
    int workers = 1;
    std::uint64_t seed = 0;
    CLI::Option* seed_opt = nullptr;
    std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "config file with key = value lines");
    cmd->add_option("--preset", o.preset, "parameter preset (fig2, fig3)")
        ->check(CLI::IsMember({"fig2", "fig3"}));
    cmd->add_option("--out", o.out_dir, "output directory (default: out)");
    cmd->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
    o.seed_opt = cmd->add_option("--seed", o.seed, "master seed override");
    cmd->add_option("--set", o.sets, "config override, e.g. --set sim.dt=0.002");
}

RunConfig build_config(const CommonOpts& o) {
    RunConfig cfg;
    if (!o.preset.empty()) apply_preset(cfg, o.preset);
    if (!o.config_path.empty()) apply_config_file(cfg, o.config_path);
    for (const auto& kv : o.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ValidationError("--set expects key=value, got '" + kv + "'");
        cfg.set(detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1)));
    }
    if (o.seed_opt != nullptr && o.seed_opt->count() > 0) cfg.noise.master_seed = o.seed;
    cfg.normalize_units();
    cfg.validate();
    return cfg;
}

fs::path prepare_out_dir(const CommonOpts& o) {
    fs::path dir(o.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec && !fs::is_directory(dir))
        throw ValidationError("cannot create output directory '" + o.out_dir + "'");
    return dir;
}

void write_manifest(const fs::path& dir, const RunConfig& cfg, const std::string& command) {
    std::ofstream out(dir / "manifest.cfg");
    if (!out) throw ValidationError("cannot write manifest in '" + dir.string() + "'");
    out << "# " << version_string() << "\n";
    out << "# command = " << command << "\n";
    out << cfg.serialize();
}

std::string d_tag(double d) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", d);
    return buf;
}

// ---- simulate --------------------------------------------------------------

int cmd_simulate(const CommonOpts& o, bool binary) {
    RunConfig cfg = build_config(o);
    SimConfig sim = cfg.sim;
    sim.initial_state = cfg.resolve_initial();

    const auto dir = prepare_out_dir(o);
    write_manifest(dir, cfg, "simulate");

    const auto t0 = std::chrono::steady_clock::now();
    const auto trajs = run_ensemble(sim, cfg.system, cfg.noise, o.workers);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    for (const auto& traj : trajs) {
        char name[64];
        std::snprintf(name, sizeof name, "traj_%04llu.csv",
                      static_cast<unsigned long long>(traj.trajectory_index));
        write_trajectory_csv((dir / name).string(), traj);
        if (binary) {
            std::snprintf(name, sizeof name, "traj_%04llu.bin",
                          static_cast<unsigned long long>(traj.trajectory_index));
            write_trajectory_binary((dir / name).string(), traj);
        }
    }
    std::printf("simulate: %d trajectories, %zu samples each, %.1f s -> %s\n",
                sim.n_trajectories, trajs.front().size(), elapsed, dir.string().c_str());
    return kExitOk;
}

// ---- spectrum ---------------------------------------------------------------

int spectrum_self_test() {
    const std::size_t n = 4096;
    const double dt = 0.05, amp = 1.25;
    const double nu0 = 128.0 / (static_cast<double>(n) * dt);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = amp * std::cos(2.0 * std::numbers::pi * nu0 * dt * static_cast<double>(i));
    PsdOptions opt;
    opt.segment_length = n;
    opt.overlap = 0.0;
    opt.window = Window::rectangular;
    opt.detrend = false;
    const Spectrum s = estimate_psd_series(x, dt, opt);
    double total = 0.0;
    for (double v : s.psd) total += v;
    total *= s.bin_width();
    const double want = amp * amp / 2.0;
    std::printf("self-test: sinusoid amplitude %.4g at nu=%.6g\n", amp, nu0);
    std::printf("self-test: integrated psd = %.17g, expected %.17g, rel err %.3g\n", total, want,
                std::abs(total - want) / want);
    return std::abs(total - want) / want < 1e-10 ? kExitOk : 1;
}

int spectrum_lines(const CommonOpts& o) {
    RunConfig cfg = build_config(o);
    const auto dir = prepare_out_dir(o);
    write_manifest(dir, cfg, "spectrum --lines");

    const Spectrum s = liouvillian_lines(cfg.system, cfg.sim.dt, cfg.sim.t_max);
    write_spectrum_csv((dir / "lines.csv").string(), s);
    write_plot_data((dir / "lines.dat").string(), s);

    const auto peaks = detect_peaks(s, cfg.peak_floor, static_cast<std::size_t>(cfg.max_peaks));
    const TransitionSet t = transition_frequencies(cfg.system.delta1, cfg.system.g);
    std::printf("model transitions: nu = %.6g %.6g %.6g %.6g\n", t.nu1, t.nu2, t.nu3, t.nu4);
    std::printf("detected lines   :");
    for (const auto& p : peaks.peaks) std::printf(" %.6g", p.nu);
    std::printf("\n");
    return kExitOk;
}

int cmd_spectrum(const CommonOpts& o, const std::string& traj_dir) {
    RunConfig cfg = build_config(o);
    const auto dir = prepare_out_dir(o);
    write_manifest(dir, cfg, "spectrum");

    auto emit = [&](const std::vector<Trajectory>& trajs, const std::string& suffix) {
        for (Comp c : cfg.spectral_components) {
            const Spectrum s = estimate_psd(trajs, c, cfg.spectral);
            const std::string base = "spectrum_" + std::string(component_name(c)) + suffix;
            write_spectrum_csv((dir / (base + ".csv")).string(), s);
            write_plot_data((dir / (base + ".dat")).string(), s);
            const auto peaks =
                detect_peaks(s, cfg.peak_floor, static_cast<std::size_t>(cfg.max_peaks));
            std::printf("%s: %zu peaks at", base.c_str(), peaks.size());
            for (const auto& p : peaks.peaks) std::printf(" %.4f", p.nu);
            std::printf("\n");
        }
    };

    if (!traj_dir.empty()) {
        std::vector<Trajectory> trajs;
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(traj_dir)) {
            const auto name = entry.path().filename().string();
            if (name.rfind("traj_", 0) == 0 && entry.path().extension() == ".csv")
                files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        if (files.empty())
            throw ValidationError("no traj_*.csv files in '" + traj_dir + "'");
        for (const auto& f : files) trajs.push_back(read_trajectory_csv(f.string()));
        emit(trajs, "");
        return kExitOk;
    }

    SimConfig sim = cfg.sim;
    sim.initial_state = cfg.resolve_initial();
    for (double d : cfg.resolved_d_values()) {
        NoiseSpec noise = cfg.noise;
        noise.intensity_d = d;
        const auto trajs = run_ensemble(sim, cfg.system, noise, o.workers);
        emit(trajs, "_d" + d_tag(d));
    }
    return kExitOk;
}

// ---- estimate ---------------------------------------------------------------

int cmd_estimate(const CommonOpts& o, const std::string& x_file, const std::string& z_file) {
    RunConfig cfg = build_config(o);
    if (x_file.empty() && z_file.empty())
        throw ValidationError("estimate: provide --x and/or --z spectrum files");

    PeakSet peaks_x, peaks_z;
    const auto max_peaks = static_cast<std::size_t>(cfg.max_peaks);
    if (!x_file.empty())
        peaks_x = detect_peaks(read_spectrum_csv(x_file), cfg.peak_floor, max_peaks);
    if (!z_file.empty())
        peaks_z = detect_peaks(read_spectrum_csv(z_file), cfg.peak_floor, max_peaks);

    auto list_peaks = [](const char* tag, const PeakSet& ps) {
        std::printf("%s peaks:", tag);
        for (const auto& p : ps.peaks) std::printf(" %.4f", p.nu);
        std::printf("\n");
    };
    list_peaks("x", peaks_x);
    list_peaks("z", peaks_z);

    EstimatedParams est;
    try {
        est = invert_parameters(peaks_x, peaks_z, cfg.invert);
    } catch (const InsufficientDataError& e) {
        std::fprintf(stderr, "estimate: %s\n", e.what());
        throw;
    }
    std::fputs(estimate_report_text(est).c_str(), stdout);

    // control cross-check: each spectrum alone should give a consistent fit
    for (const auto& [tag, ps] : {std::pair<const char*, const PeakSet&>{"x", peaks_x},
                                  {"z", peaks_z}}) {
        if (ps.size() < 2) continue;
        try {
            const auto solo = invert_parameters(ps, PeakSet{}, cfg.invert);
            std::printf("control[%s]: delta_hat = %.6g, g_hat = %.6g\n", tag, solo.delta_hat,
                        solo.g_hat_magnitude);
        } catch (const InsufficientDataError&) {
            std::printf("control[%s]: not enough peaks\n", tag);
        }
    }

    const auto dir = prepare_out_dir(o);
    write_manifest(dir, cfg, "estimate");
    write_estimate_report((dir / "estimate.txt").string(), est);
    write_estimate_csv((dir / "estimate.csv").string(), est);
    return kExitOk;
}

// ---- correlate ---------------------------------------------------------------

SimConfig correlate_sim_config(const RunConfig& cfg) {
    SimConfig sim = cfg.sim;
    // correlation sampling wants near-independent samples: default to a
    // coarse recording interval of 5 time units unless explicitly set
    if (!cfg.was_set("sim.record_stride"))
        sim.record_stride = std::max(1, static_cast<int>(std::llround(5.0 / sim.dt)));
    if (!cfg.was_set("sim.components")) sim.record = {c0x, cx0};
    if (!cfg.was_set("sim.n_trajectories")) sim.n_trajectories = 32;
    return sim;
}

int cmd_correlate(const CommonOpts& o) {
    RunConfig cfg = build_config(o);
    const auto dir = prepare_out_dir(o);
    write_manifest(dir, cfg, "correlate");

    const SimConfig sim = correlate_sim_config(cfg);
    std::vector<double> grid = cfg.g_grid;
    if (grid.empty()) grid = {cfg.system.g};

    const auto t0 = std::chrono::steady_clock::now();
    const auto sweep = correlation_sweep(grid, cfg.system, cfg.noise, sim, o.workers);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::printf("%10s %10s %10s %10s\n", "g", "r", "std_err", "n");
    for (const auto& c : sweep)
        std::printf("%10.4f %10.4f %10.4f %10lld\n", c.g_value, c.r, c.std_error, c.n);
    std::printf("correlate: %zu point(s), %.1f s\n", sweep.size(), elapsed);

    write_sweep_csv((dir / "correlation.csv").string(), sweep);
    write_sweep_plot_data((dir / "correlation.dat").string(), sweep);
    return kExitOk;
}

// ---- noise-check --------------------------------------------------------------

int cmd_noise_check(const CommonOpts& o, long long steps, const std::string& dump) {
    RunConfig cfg = build_config(o);
    const double dt = cfg.sim.dt;
    const std::size_t n = steps > 0 ? static_cast<std::size_t>(steps)
                                    : static_cast<std::size_t>(cfg.sim.n_steps());

    const auto path = generate_path(cfg.noise, dt, n, 0);
    const auto m = noise_statistics(path);
    const double want_var = 2.0 * cfg.noise.intensity_d / dt;

    std::printf("noise-check: D = %g, dt = %g, n = %zu\n", cfg.noise.intensity_d, dt, n);
    std::printf("%18s %17s %17s\n", "moment", "measured", "expected");
    std::printf("%18s %17.10g %17.10g\n", "mean(eps1)", m.mean1, 0.0);
    std::printf("%18s %17.10g %17.10g\n", "mean(eps2)", m.mean2, 0.0);
    std::printf("%18s %17.10g %17.10g\n", "var(eps1)", m.var1, want_var);
    std::printf("%18s %17.10g %17.10g\n", "var(eps2)", m.var2, want_var);
    std::printf("%18s %17.10g %17.10g\n", "cross_cov", m.cross_covariance, 0.0);

    const auto dir = prepare_out_dir(o);
    write_manifest(dir, cfg, "noise-check");
    if (!dump.empty()) write_noise_path((dir / dump).string(), path);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-qubit noise spectroscopy simulator"};
    app.set_version_flag("--version", version_string());
    app.require_subcommand(1);

    CommonOpts sim_opts, spec_opts, est_opts, corr_opts, noise_opts;
    bool sim_binary = false;
    std::string traj_dir, est_x, est_z, noise_dump;
    bool spec_self_test = false, spec_lines = false;
    long long noise_steps = 0;

    auto* sim_cmd = app.add_subcommand("simulate", "run the noisy ensemble, write trajectories");
    add_common(sim_cmd, sim_opts);
    sim_cmd->add_flag("--binary", sim_binary, "also write binary trajectories");

    auto* spec_cmd = app.add_subcommand("spectrum", "simulate (or load) and estimate spectra");
    add_common(spec_cmd, spec_opts);
    spec_cmd->add_option("--traj-dir", traj_dir, "read traj_*.csv from this directory");
    spec_cmd->add_flag("--self-test", spec_self_test, "sinusoid power-conservation check");
    spec_cmd->add_flag("--lines", spec_lines, "noiseless undamped line spectrum");

    auto* est_cmd = app.add_subcommand("estimate", "recover delta and |g| from spectrum files");
    add_common(est_cmd, est_opts);
    est_cmd->add_option("--x", est_x, "spectrum CSV of the x-type component");
    est_cmd->add_option("--z", est_z, "spectrum CSV of the z-type component");

    auto* corr_cmd = app.add_subcommand("correlate", "inter-qubit correlation vs coupling");
    add_common(corr_cmd, corr_opts);

    auto* noise_cmd = app.add_subcommand("noise-check", "empirical noise moments vs theory");
    add_common(noise_cmd, noise_opts);
    noise_cmd->add_option("--steps", noise_steps, "samples to draw (default sim.t_max/sim.dt)");
    noise_cmd->add_option("--dump", noise_dump, "write the binary path to this file in --out");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (sim_cmd->parsed()) return cmd_simulate(sim_opts, sim_binary);
        if (spec_cmd->parsed()) {
            if (spec_self_test) return spectrum_self_test();
            if (spec_lines) return spectrum_lines(spec_opts);
            return cmd_spectrum(spec_opts, traj_dir);
        }
        if (est_cmd->parsed()) return cmd_estimate(est_opts, est_x, est_z);
        if (corr_cmd->parsed()) return cmd_correlate(corr_opts);
        if (noise_cmd->parsed()) return cmd_noise_check(noise_opts, noise_steps, noise_dump);
    } catch (const DivergenceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitDiverged;
    } catch (const InsufficientDataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInsufficient;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return kExitOk;
}
