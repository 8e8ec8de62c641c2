#ifndef NOISESPEC_SPECTRAL_HPP
#define NOISESPEC_SPECTRAL_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "noisespec/errors.hpp"
#include "noisespec/integrate.hpp"

namespace noisespec {

namespace detail {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace detail

// In-place iterative radix-2 transform.  Forward uses e^{-2pi i k n / N};
// inverse includes the 1/N factor.
inline void fft_complex(std::vector<std::complex<double>>& a, bool inverse = false) {
    const std::size_t n = a.size();
    if (!detail::is_power_of_two(n))
        throw ValidationError("fft: length must be a power of two, got " + std::to_string(n));

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse)
        for (auto& x : a) x /= static_cast<double>(n);
}

// One-sided transform of a real sequence: bins 0 .. n/2.
inline std::vector<std::complex<double>> fft_real(std::span<const double> x) {
    if (!detail::is_power_of_two(x.size()))
        throw ValidationError("fft_real: length must be a power of two, got " +
                              std::to_string(x.size()));
    std::vector<std::complex<double>> a(x.begin(), x.end());
    fft_complex(a);
    a.resize(x.size() / 2 + 1);
    return a;
}

enum class Window { rectangular, hann };

inline std::string window_name(Window w) {
    return w == Window::hann ? "hann" : "rectangular";
}

inline Window parse_window(const std::string& name) {
    if (name == "hann") return Window::hann;
    if (name == "rectangular" || name == "rect") return Window::rectangular;
    throw ValidationError("spectral.window: unknown window '" + name + "'");
}

struct PsdOptions {
    std::size_t segment_length = 4096;  // power of two
    double overlap = 0.5;               // fraction of segment_length
    Window window = Window::hann;
    bool detrend = true;  // remove the per-segment mean

    void validate() const {
        if (!detail::is_power_of_two(segment_length))
            throw ValidationError("spectral.segment_length: must be a power of two");
        if (overlap < 0.0 || overlap > 0.9)
            throw ValidationError("spectral.overlap: must lie in [0, 0.9]");
    }
};

// One-sided power spectral density over nu (cycles per unit time), normalized
// so that sum(psd) * dnu equals the variance of the analyzed series
// (Parseval convention; exact for the rectangular window without averaging).
// An omega = 2 pi nu axis is provided in exports.
struct Spectrum {
    std::vector<double> frequencies;  // nu grid, spacing 1/(segment_length*dt_record)
    std::vector<double> psd;
    std::string component;
    double dt_record = 0.0;
    std::size_t segment_length = 0;
    Window window = Window::rectangular;
    int ensemble_size = 0;
    long long n_segments = 0;

    double bin_width() const { return frequencies.size() > 1 ? frequencies[1] : 0.0; }
};

namespace detail {

inline std::vector<double> make_window(Window w, std::size_t n) {
    std::vector<double> win(n, 1.0);
    if (w == Window::hann)
        for (std::size_t i = 0; i < n; ++i)
            win[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                          static_cast<double>(n));
    return win;
}

// Accumulates |FFT|^2 of windowed, optionally mean-removed segments.
struct WelchAccumulator {
    explicit WelchAccumulator(const PsdOptions& opt) : opt_(opt), win_(make_window(opt.window, opt.segment_length)) {
        sum_.assign(opt.segment_length / 2 + 1, 0.0);
        for (double w : win_) win_power_ += w * w;
    }

    void add_series(std::span<const double> x) {
        const std::size_t seg = opt_.segment_length;
        if (x.size() < seg) return;
        const std::size_t hop =
            std::max<std::size_t>(1, seg - static_cast<std::size_t>(opt_.overlap * seg));
        for (std::size_t start = 0; start + seg <= x.size(); start += hop) {
            buffer_.assign(x.begin() + start, x.begin() + start + seg);
            if (opt_.detrend) {
                double mean = 0.0;
                for (double v : buffer_) mean += v;
                mean /= static_cast<double>(seg);
                for (double& v : buffer_) v -= mean;
            }
            for (std::size_t i = 0; i < seg; ++i) buffer_[i] *= win_[i];
            auto bins = fft_real(buffer_);
            for (std::size_t k = 0; k < bins.size(); ++k) sum_[k] += std::norm(bins[k]);
            ++count_;
        }
    }

    Spectrum finalize(double dt_record) const {
        if (count_ == 0)
            throw ValidationError("estimate_psd: fewer samples than one segment of " +
                                  std::to_string(opt_.segment_length));
        const std::size_t seg = opt_.segment_length;
        Spectrum s;
        s.dt_record = dt_record;
        s.segment_length = seg;
        s.window = opt_.window;
        s.n_segments = count_;
        s.frequencies.resize(seg / 2 + 1);
        s.psd.resize(seg / 2 + 1);
        const double dnu = 1.0 / (static_cast<double>(seg) * dt_record);
        // scale = dt / sum(w^2), one-sided doubling except DC and Nyquist
        const double scale = dt_record / win_power_ / static_cast<double>(count_);
        for (std::size_t k = 0; k < s.psd.size(); ++k) {
            s.frequencies[k] = dnu * static_cast<double>(k);
            const double sided = (k == 0 || k == seg / 2) ? 1.0 : 2.0;
            s.psd[k] = sided * scale * sum_[k];
        }
        return s;
    }

    PsdOptions opt_;
    std::vector<double> win_;
    std::vector<double> sum_;
    std::vector<double> buffer_;
    double win_power_ = 0.0;
    long long count_ = 0;
};

}  // namespace detail

// PSD of a single series; building block and self-test entry point.
inline Spectrum estimate_psd_series(std::span<const double> x, double dt_record,
                                    const PsdOptions& opt = {}) {
    opt.validate();
    if (!(dt_record > 0.0)) throw ValidationError("estimate_psd: dt_record must be > 0");
    detail::WelchAccumulator acc(opt);
    acc.add_series(x);
    Spectrum s = acc.finalize(dt_record);
    s.ensemble_size = 1;
    return s;
}

// Ensemble-averaged PSD of one recorded component.  Trajectories are reduced
// in index order, so the result does not depend on scheduling.
inline Spectrum estimate_psd(std::span<const Trajectory> trajectories, Comp component,
                             const PsdOptions& opt = {}) {
    opt.validate();
    if (trajectories.empty()) throw ValidationError("estimate_psd: no trajectories");
    const double dt_record = trajectories.front().dt_record;
    detail::WelchAccumulator acc(opt);
    for (const auto& traj : trajectories) {
        if (traj.dt_record != dt_record)
            throw ValidationError("estimate_psd: trajectories have mixed sampling intervals");
        acc.add_series(traj.series(component));
    }
    Spectrum s = acc.finalize(dt_record);
    s.component = std::string(component_name(component));
    s.ensemble_size = static_cast<int>(trajectories.size());
    return s;
}

// Line spectrum of the noiseless, undamped system: integrates a generic
// product start with rates forced to zero and sums the PSDs of the four
// single-qubit sector observables (pi_0x, pi_0z, pi_x0, pi_z0).  Their
// spectral mass sits exactly at the interlevel transition frequencies, which
// validates the frequency map without noise.
inline Spectrum liouvillian_lines(const SystemParams& params, double dt, double t_max) {
    SystemParams p = params;
    p.gamma_phi1 = p.gamma_phi2 = p.gamma_r1 = p.gamma_r2 = 0.0;
    p.validate();

    // Generic start: pure product state with all 15 components nonzero.
    const double a = 1.0 / std::sqrt(3.0);
    BlochTensor15 s0 = product_state({a, a, a}, {a, -a, a});
    s0[cxx] = s0[cx0] * s0[c0x];
    s0[cxy] = s0[cx0] * s0[c0y];
    s0[cxz] = s0[cx0] * s0[c0z];
    s0[cyx] = s0[cy0] * s0[c0x];
    s0[cyy] = s0[cy0] * s0[c0y];
    s0[cyz] = s0[cy0] * s0[c0z];
    s0[czx] = s0[cz0] * s0[c0x];
    s0[czy] = s0[cz0] * s0[c0y];
    s0[czz] = s0[cz0] * s0[c0z];

    const int stride = std::max(1, static_cast<int>(std::llround(0.05 / dt)));
    Trajectory traj = integrate_deterministic(s0, p, BiasPair{}, dt, t_max, stride);

    std::size_t seg = 1;
    while (seg * 2 <= traj.size()) seg *= 2;
    PsdOptions opt;
    opt.segment_length = seg;
    opt.overlap = 0.5;
    opt.window = Window::hann;
    opt.detrend = true;

    Spectrum total;
    for (Comp c : {c0x, c0z, cx0, cz0}) {
        Spectrum s = estimate_psd_series(traj.series(c), traj.dt_record, opt);
        if (total.psd.empty()) {
            total = s;
        } else {
            for (std::size_t k = 0; k < total.psd.size(); ++k) total.psd[k] += s.psd[k];
        }
    }
    total.component = "sectors";
    return total;
}

}  // namespace noisespec

#endif
