#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "noisespec/config.hpp"
#include "noisespec/io.hpp"

using namespace noisespec;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("noisespec_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("config text parses dotted keys and comments", "[config]") {
    RunConfig cfg;
    apply_kv_text(cfg,
                  "# a comment\n"
                  "system.delta2 = 0.8   # trailing comment\n"
                  "noise.d = 0.04\n"
                  "noise.seed = 987\n"
                  "\n"
                  "sim.dt = 0.002\n"
                  "sim.components = pi_0x, pi_zz\n"
                  "spectral.window = rectangular\n"
                  "analysis.g_grid = -0.5:0.5:0.5\n",
                  "inline");
    REQUIRE(cfg.system.delta2 == 0.8);
    REQUIRE(cfg.noise.intensity_d == 0.04);
    REQUIRE(cfg.noise.master_seed == 987);
    REQUIRE(cfg.sim.dt == 0.002);
    REQUIRE(cfg.sim.record == std::vector<Comp>{c0x, czz});
    REQUIRE(cfg.spectral.window == Window::rectangular);
    REQUIRE(cfg.g_grid == std::vector<double>{-0.5, 0.0, 0.5});
    REQUIRE(cfg.was_set("noise.d"));
    REQUIRE(!cfg.was_set("sim.t_max"));
}

TEST_CASE("config errors carry the origin and the field", "[config]") {
    RunConfig cfg;
    try {
        apply_kv_text(cfg, "sim.dt == 0.01\n", "test.cfg");
        FAIL("expected error");
    } catch (const ValidationError& e) {
        REQUIRE(std::string(e.what()).find("test.cfg:1") != std::string::npos);
    }
    REQUIRE_THROWS_AS(apply_kv_text(cfg, "nonsense.key = 1\n", "x"), ValidationError);
    REQUIRE_THROWS_AS(apply_kv_text(cfg, "sim.dt = fast\n", "x"), ValidationError);
    try {
        apply_kv_text(cfg, "system.gamma_r1 = -0.5\n", "x");
        cfg.validate();
        FAIL("expected error");
    } catch (const ValidationError& e) {
        REQUIRE(std::string(e.what()).find("gamma_r1") != std::string::npos);
    }
}

TEST_CASE("config serializes and parses back identically", "[config]") {
    RunConfig cfg;
    apply_kv_text(cfg,
                  "system.g = -0.731\n"
                  "noise.d = 0.0131\n"
                  "noise.seed = 31337\n"
                  "sim.dt = 0.0025\n"
                  "sim.initial = product:0.1,0.2,0.3;0,0,1\n"
                  "analysis.g_grid = -0.2,0.2\n",
                  "inline");
    const std::string text = cfg.serialize();
    RunConfig back;
    apply_kv_text(back, text, "roundtrip");
    REQUIRE(back.system.g == cfg.system.g);
    REQUIRE(back.noise.intensity_d == cfg.noise.intensity_d);
    REQUIRE(back.noise.master_seed == cfg.noise.master_seed);
    REQUIRE(back.sim.dt == cfg.sim.dt);
    REQUIRE(back.initial == cfg.initial);
    REQUIRE(back.g_grid == cfg.g_grid);
    REQUIRE(back.serialize() == text);
}

TEST_CASE("presets carry exactly the reproduced parameter values", "[config]") {
    RunConfig fig2;
    apply_preset(fig2, "fig2");
    REQUIRE(fig2.system.delta1 == 1.0);
    REQUIRE(fig2.system.delta2 == 1.0);
    REQUIRE(fig2.system.g == 0.5);
    REQUIRE(fig2.system.gamma_phi1 == 0.1);
    REQUIRE(fig2.system.gamma_phi2 == 0.1);
    REQUIRE(fig2.system.gamma_r1 == 0.1);
    REQUIRE(fig2.system.gamma_r2 == 0.1);
    REQUIRE(fig2.system.z_t1 == 1.0);
    REQUIRE(fig2.system.z_t2 == 1.0);
    REQUIRE(fig2.noise.intensity_d == 0.013);
    REQUIRE(fig2.d_values == std::vector<double>{0.013, 0.04});

    RunConfig fig3;
    apply_preset(fig3, "fig3");
    REQUIRE(fig3.noise.intensity_d == 0.013);
    REQUIRE(fig3.g_grid.size() == 31);
    REQUIRE(fig3.g_grid.front() == Catch::Approx(-1.5));
    REQUIRE(fig3.g_grid.back() == Catch::Approx(1.5));

    RunConfig bad;
    REQUIRE_THROWS_AS(apply_preset(bad, "fig9"), ValidationError);
}

TEST_CASE("unit normalization rescales to delta1 = 1", "[config]") {
    RunConfig cfg;
    apply_kv_text(cfg,
                  "system.delta1 = 5\n"
                  "system.delta2 = 4\n"
                  "system.g = 2.5\n"
                  "system.gamma_phi1 = 0.5\n"
                  "noise.d = 0.065\n"
                  "sim.dt = 0.001\n"
                  "sim.t_max = 400\n"
                  "sim.burn_in = 10\n",
                  "inline");
    cfg.normalize_units();
    REQUIRE(cfg.system.delta1 == 1.0);
    REQUIRE(cfg.system.delta2 == Catch::Approx(0.8));
    REQUIRE(cfg.system.g == Catch::Approx(0.5));
    REQUIRE(cfg.system.gamma_phi1 == Catch::Approx(0.1));
    REQUIRE(cfg.noise.intensity_d == Catch::Approx(0.013));
    REQUIRE(cfg.sim.dt == Catch::Approx(0.005));
    REQUIRE(cfg.sim.t_max == Catch::Approx(2000.0));
    REQUIRE(cfg.sim.burn_in == Catch::Approx(50.0));
}

TEST_CASE("'all' selects the full tensor for recording", "[config]") {
    RunConfig cfg;
    cfg.set("sim.components", "all");
    REQUIRE(cfg.sim.record.size() == kNumComponents);
    REQUIRE(cfg.sim.record.front() == c0x);
    REQUIRE(cfg.sim.record.back() == czz);
}

TEST_CASE("initial state specs resolve", "[config]") {
    RunConfig cfg;
    REQUIRE(cfg.resolve_initial()[cz0] == cfg.system.z_t1);
    cfg.set("sim.initial", "product:1,0,0;0,0,1");
    const auto s = cfg.resolve_initial();
    REQUIRE(s[cx0] == 1.0);
    REQUIRE(s[c0z] == 1.0);
    cfg.set("sim.initial", "banana");
    REQUIRE_THROWS_AS(cfg.resolve_initial(), ValidationError);
}

TEST_CASE("trajectory csv round-trips", "[io]") {
    TempDir dir("io_csv");
    Trajectory traj;
    traj.dt_record = 0.05;
    traj.t0 = 1.0;
    traj.trajectory_index = 3;
    traj.master_seed = 99;
    traj.components = {c0x, czz};
    traj.data = {{0.25, -0.5, 0.125}, {1.0, 0.75, -0.375}};

    const auto file = (dir.path / "traj.csv").string();
    write_trajectory_csv(file, traj);
    const Trajectory back = read_trajectory_csv(file);
    REQUIRE(back.components == traj.components);
    REQUIRE(back.dt_record == Catch::Approx(0.05));
    REQUIRE(back.data == traj.data);

    const std::string text = slurp(file);
    REQUIRE(text.rfind("t,pi_0x,pi_zz\n", 0) == 0);
}

TEST_CASE("trajectory binary round-trips bit-exactly", "[io]") {
    TempDir dir("io_bin");
    Trajectory traj;
    traj.dt_record = 0.05;
    traj.t0 = 0.0;
    traj.trajectory_index = 12;
    traj.master_seed = 777;
    traj.components = {c0x, c0z, cx0};
    traj.data.assign(3, {});
    auto rng = std::mt19937_64(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& series : traj.data)
        for (int i = 0; i < 1000; ++i) series.push_back(u(rng));

    const auto file = (dir.path / "traj.bin").string();
    write_trajectory_binary(file, traj);
    const Trajectory back = read_trajectory_binary(file);
    REQUIRE(back.dt_record == traj.dt_record);
    REQUIRE(back.trajectory_index == traj.trajectory_index);
    REQUIRE(back.master_seed == traj.master_seed);
    REQUIRE(back.components == traj.components);
    REQUIRE(back.data == traj.data);

    REQUIRE_THROWS_AS(read_trajectory_binary((dir.path / "missing.bin").string()),
                      ValidationError);
}

TEST_CASE("spectrum csv round-trips", "[io]") {
    TempDir dir("io_spec");
    Spectrum s;
    s.component = "pi_0x";
    s.dt_record = 0.05;
    s.segment_length = 8;
    s.window = Window::hann;
    s.ensemble_size = 4;
    s.n_segments = 40;
    s.frequencies = {0.0, 0.1, 0.2, 0.3, 0.4};
    s.psd = {0.0, 1.5, 2.25, 0.5, 0.125};

    const auto file = (dir.path / "spec.csv").string();
    write_spectrum_csv(file, s);
    const Spectrum back = read_spectrum_csv(file);
    REQUIRE(back.component == s.component);
    REQUIRE(back.segment_length == s.segment_length);
    REQUIRE(back.window == Window::hann);
    REQUIRE(back.frequencies == s.frequencies);
    REQUIRE(back.psd == s.psd);
}
