#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "noisespec/analysis.hpp"
#include "noisespec/spectral.hpp"
#include "oracles.hpp"

using namespace noisespec;

TEST_CASE("fft of a constant concentrates in bin zero", "[spectral]") {
    const double c = 0.37;
    std::vector<double> x(8, c);
    const auto bins = fft_real(x);
    REQUIRE(bins.size() == 5);
    REQUIRE(bins[0].real() == Catch::Approx(8.0 * c).margin(1e-12));
    REQUIRE(bins[0].imag() == Catch::Approx(0.0).margin(1e-12));
    for (std::size_t k = 1; k < bins.size(); ++k) REQUIRE(std::abs(bins[k]) < 1e-12);
}

TEST_CASE("fft of an on-grid cosine concentrates in its bin", "[spectral]") {
    const std::size_t n = 64, k0 = 3;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = std::cos(2.0 * std::numbers::pi * static_cast<double>(k0 * i) /
                        static_cast<double>(n));
    const auto bins = fft_real(x);
    for (std::size_t k = 0; k < bins.size(); ++k) {
        if (k == k0)
            REQUIRE(std::abs(bins[k]) == Catch::Approx(static_cast<double>(n) / 2.0).margin(1e-9));
        else
            REQUIRE(std::abs(bins[k]) < 1e-9);
    }
}

TEST_CASE("fft matches the brute-force transform", "[spectral]") {
    auto rng = oracles::test_rng(1201);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> x(256);
    for (auto& v : x) v = u(rng);
    const auto fast = fft_real(x);
    const auto slow = oracles::naive_dft(x);
    double scale = 0.0;
    for (const auto& s : slow) scale = std::max(scale, std::abs(s));
    for (std::size_t k = 0; k < fast.size(); ++k)
        REQUIRE(std::abs(fast[k] - slow[k]) < 1e-10 * scale);
}

TEST_CASE("fft round-trips through its inverse and is linear", "[spectral]") {
    auto rng = oracles::test_rng(77);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::size_t n = 128;
    std::vector<std::complex<double>> a(n), b(n);
    for (auto& v : a) v = {u(rng), u(rng)};
    for (auto& v : b) v = {u(rng), u(rng)};

    auto fa = a, fb = b;
    fft_complex(fa);
    fft_complex(fb);

    // linearity
    std::vector<std::complex<double>> mix(n);
    const std::complex<double> alpha(0.8, -0.3), beta(-1.1, 0.4);
    for (std::size_t i = 0; i < n; ++i) mix[i] = alpha * a[i] + beta * b[i];
    fft_complex(mix);
    for (std::size_t k = 0; k < n; ++k)
        REQUIRE(std::abs(mix[k] - (alpha * fa[k] + beta * fb[k])) < 1e-10);

    // round trip
    fft_complex(fa, /*inverse=*/true);
    for (std::size_t i = 0; i < n; ++i) REQUIRE(std::abs(fa[i] - a[i]) < 1e-10);
}

TEST_CASE("fft rejects non-power-of-two lengths", "[spectral]") {
    std::vector<double> x(100, 1.0);
    REQUIRE_THROWS_AS(fft_real(x), ValidationError);
    std::vector<std::complex<double>> c(12);
    REQUIRE_THROWS_AS(fft_complex(c), ValidationError);
}

TEST_CASE("on-grid sinusoid carries its full power", "[spectral]") {
    const std::size_t n = 4096;
    const double dt = 0.05;
    const double amp = 0.8;
    const std::size_t k0 = 100;
    const double nu0 = static_cast<double>(k0) / (static_cast<double>(n) * dt);
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
    REQUIRE(total == Catch::Approx(amp * amp / 2.0).margin(1e-10));

    const auto peaks = detect_peaks(s);
    REQUIRE(peaks.size() == 1);
    REQUIRE(std::abs(peaks.peaks[0].nu - nu0) < 0.5 * s.bin_width());
}

TEST_CASE("psd integrates to the variance", "[spectral]") {
    auto rng = oracles::test_rng(9001);
    std::normal_distribution<double> gauss(0.0, 1.3);
    const std::size_t n = 2048;
    const double dt = 0.1;
    std::vector<double> x(n);
    for (auto& v : x) v = gauss(rng) + 0.4;

    PsdOptions opt;
    opt.segment_length = n;
    opt.overlap = 0.0;
    opt.window = Window::rectangular;
    opt.detrend = true;
    const Spectrum s = estimate_psd_series(x, dt, opt);

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);

    double total = 0.0;
    for (double v : s.psd) total += v;
    total *= s.bin_width();
    REQUIRE(total == Catch::Approx(var).epsilon(1e-8));
}

TEST_CASE("averaged white-noise periodograms are flat", "[spectral]") {
    auto rng = oracles::test_rng(4242);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double dt = 0.05;
    const std::size_t seg = 256;
    const int n_traj = 16, n_seg_per_traj = 32;

    std::vector<Trajectory> trajs;
    for (int t = 0; t < n_traj; ++t) {
        Trajectory traj;
        traj.dt_record = dt;
        traj.components = {c0x};
        traj.data.assign(1, std::vector<double>(seg * n_seg_per_traj));
        for (auto& v : traj.data[0]) v = gauss(rng);
        trajs.push_back(std::move(traj));
    }

    PsdOptions opt;
    opt.segment_length = seg;
    opt.overlap = 0.0;
    opt.window = Window::rectangular;
    opt.detrend = true;
    const Spectrum s = estimate_psd(trajs, c0x, opt);

    // white noise of variance 1: two-sided density sigma^2 * dt, one-sided twice that
    const double want = 2.0 * dt;
    const double bound = 4.0 / std::sqrt(static_cast<double>(n_traj * n_seg_per_traj));
    for (std::size_t k = 1; k + 1 < s.psd.size(); ++k)
        REQUIRE(std::abs(s.psd[k] - want) / want < bound);
}

TEST_CASE("psd standard error falls like one over root ensemble size", "[spectral]") {
    auto rng = oracles::test_rng(246810);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double dt = 0.05;
    const std::size_t seg = 128;

    auto make_traj = [&] {
        Trajectory traj;
        traj.dt_record = dt;
        traj.components = {c0x};
        traj.data.assign(1, std::vector<double>(seg * 4));
        for (auto& v : traj.data[0]) v = gauss(rng);
        return traj;
    };

    PsdOptions opt;
    opt.segment_length = seg;
    opt.overlap = 0.0;
    opt.window = Window::rectangular;
    opt.detrend = true;

    // spread of the bin-averaged PSD across independent sub-ensembles
    auto spread = [&](int ensemble_size, int n_groups) {
        std::vector<double> means;
        for (int gidx = 0; gidx < n_groups; ++gidx) {
            std::vector<Trajectory> trajs;
            for (int i = 0; i < ensemble_size; ++i) trajs.push_back(make_traj());
            const Spectrum s = estimate_psd(trajs, c0x, opt);
            double m = 0.0;
            for (std::size_t k = 1; k + 1 < s.psd.size(); ++k) m += s.psd[k];
            means.push_back(m / static_cast<double>(s.psd.size() - 2));
        }
        double mu = 0.0;
        for (double m : means) mu += m;
        mu /= static_cast<double>(means.size());
        double var = 0.0;
        for (double m : means) var += (m - mu) * (m - mu);
        return std::sqrt(var / static_cast<double>(means.size() - 1));
    };

    const double se4 = spread(4, 24);
    const double se16 = spread(16, 24);
    const double ratio = se4 / se16;  // expected sqrt(16/4) = 2
    REQUIRE(ratio > 1.3);
    REQUIRE(ratio < 3.1);
}

TEST_CASE("psd estimation rejects unusable input", "[spectral]") {
    Trajectory traj;
    traj.dt_record = 0.05;
    traj.components = {c0x};
    traj.data.assign(1, std::vector<double>(100, 1.0));
    std::vector<Trajectory> trajs = {traj};

    PsdOptions opt;
    opt.segment_length = 256;  // longer than the series
    REQUIRE_THROWS_AS(estimate_psd(trajs, c0x, opt), ValidationError);
    REQUIRE_THROWS_AS(estimate_psd(trajs, czz, PsdOptions{}), ValidationError);
    PsdOptions bad;
    bad.segment_length = 100;
    REQUIRE_THROWS_AS(estimate_psd(trajs, c0x, bad), ValidationError);
}

TEST_CASE("uncoupled line spectrum shows only the bare splitting", "[spectral]") {
    SystemParams p;
    p.delta1 = p.delta2 = 1.0;
    const Spectrum s = liouvillian_lines(p, 0.005, 4096 * 0.05);
    const auto peaks = detect_peaks(s);
    REQUIRE(peaks.size() == 1);
    REQUIRE(std::abs(peaks.peaks[0].nu - 1.0 / (2.0 * std::numbers::pi)) < s.bin_width());
}

TEST_CASE("coupled line spectrum sits on the four transition frequencies", "[spectral]") {
    SystemParams p;
    p.delta1 = p.delta2 = 1.0;
    p.g = 0.5;
    const Spectrum s = liouvillian_lines(p, 0.005, 4096 * 0.05);
    const auto peaks = detect_peaks(s);
    REQUIRE(peaks.size() == 4);

    const double expected[4] = {0.0984, 0.1592, 0.2575, 0.3559};
    for (int i = 0; i < 4; ++i)
        REQUIRE(std::abs(peaks.peaks[static_cast<std::size_t>(i)].nu - expected[i]) <
                s.bin_width());

    // cross-check against the eigenvalue gaps of the Hamiltonian
    const auto ev = eigen_oracle(build_hamiltonian(p, {}));
    std::vector<double> gaps;
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) {
            const double gap = ev[b] - ev[a];
            bool seen = false;
            for (double g : gaps) seen |= std::abs(g - gap) < 1e-9;
            if (!seen && gap > 1e-9) gaps.push_back(gap);
        }
    std::sort(gaps.begin(), gaps.end());
    REQUIRE(gaps.size() == 4);
    for (int i = 0; i < 4; ++i)
        REQUIRE(std::abs(peaks.peaks[static_cast<std::size_t>(i)].nu -
                         gaps[static_cast<std::size_t>(i)] / (2.0 * std::numbers::pi)) <
                s.bin_width());
}
