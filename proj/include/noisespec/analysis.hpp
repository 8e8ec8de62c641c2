#ifndef NOISESPEC_ANALYSIS_HPP
#define NOISESPEC_ANALYSIS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "noisespec/errors.hpp"
#include "noisespec/integrate.hpp"
#include "noisespec/spectral.hpp"
#include "noisespec/types.hpp"

namespace noisespec {

// The four interlevel transition frequencies of the coupled system at zero
// bias:
//   omega1 = 2|g|, omega2,3 = sqrt(delta^2 + g^2) -/+ |g|,
//   omega4 = 2 sqrt(delta^2 + g^2),
// with the exact identities omega1 = omega3 - omega2 and
// omega4 = omega2 + omega3.  Peak positions are quoted as nu = omega / 2 pi.
struct TransitionSet {
    double omega1 = 0.0, omega2 = 0.0, omega3 = 0.0, omega4 = 0.0;
    double nu1 = 0.0, nu2 = 0.0, nu3 = 0.0, nu4 = 0.0;

    std::array<double, 4> omegas() const { return {omega1, omega2, omega3, omega4}; }
    std::array<double, 4> nus() const { return {nu1, nu2, nu3, nu4}; }
};

inline TransitionSet transition_frequencies(double delta, double g) {
    if (!(delta > 0.0) || !std::isfinite(g))
        throw ValidationError("transition_frequencies: need delta > 0 and finite g");
    const double ag = std::abs(g);
    const double root = std::sqrt(delta * delta + g * g);
    TransitionSet t;
    t.omega1 = 2.0 * ag;
    t.omega2 = root - ag;
    t.omega3 = root + ag;
    t.omega4 = 2.0 * root;
    t.nu1 = t.omega1 / (2.0 * std::numbers::pi);
    t.nu2 = t.omega2 / (2.0 * std::numbers::pi);
    t.nu3 = t.omega3 / (2.0 * std::numbers::pi);
    t.nu4 = t.omega4 / (2.0 * std::numbers::pi);
    return t;
}

struct Peak {
    double nu = 0.0;
    double height = 0.0;
    double prominence = 0.0;
    double width = 0.0;  // half-prominence width
};

// Peaks sorted by nu.
struct PeakSet {
    std::vector<Peak> peaks;

    std::size_t size() const { return peaks.size(); }
    bool empty() const { return peaks.empty(); }
};

// Local maxima of the PSD ranked by topographic prominence.  The floor is
// relative to the spectrum maximum (DC excluded).  Positions are refined by
// three-point parabolic interpolation of log-PSD; at most max_peaks survive.
inline PeakSet detect_peaks(const Spectrum& spectrum, double floor_rel = 0.01,
                            std::size_t max_peaks = 6) {
    const auto& psd = spectrum.psd;
    const auto& nu = spectrum.frequencies;
    PeakSet out;
    if (psd.size() < 4) return out;

    double top = 0.0;
    for (std::size_t k = 1; k < psd.size(); ++k) top = std::max(top, psd[k]);
    if (top <= 0.0) return out;
    const double floor_abs = floor_rel * top;

    struct Candidate {
        std::size_t bin;
        double prominence;
    };
    std::vector<Candidate> candidates;

    for (std::size_t k = 2; k + 1 < psd.size(); ++k) {
        if (!(psd[k] > psd[k - 1] && psd[k] >= psd[k + 1])) continue;
        // Prominence: drop to the highest saddle separating this maximum
        // from any higher point, DC excluded.
        double left_min = psd[k];
        for (std::size_t i = k; i-- > 1;) {
            if (psd[i] > psd[k]) break;
            left_min = std::min(left_min, psd[i]);
        }
        double right_min = psd[k];
        for (std::size_t i = k + 1; i < psd.size(); ++i) {
            if (psd[i] > psd[k]) break;
            right_min = std::min(right_min, psd[i]);
        }
        const double prominence = psd[k] - std::max(left_min, right_min);
        if (prominence >= floor_abs) candidates.push_back({k, prominence});
    }

    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) { return a.prominence > b.prominence; });
    if (candidates.size() > max_peaks) candidates.resize(max_peaks);

    const double dnu = spectrum.bin_width();
    for (const auto& c : candidates) {
        const std::size_t k = c.bin;
        double shift = 0.0;
        if (psd[k - 1] > 0.0 && psd[k + 1] > 0.0) {
            const double lm = std::log(psd[k - 1]);
            const double l0 = std::log(psd[k]);
            const double lp = std::log(psd[k + 1]);
            const double denom = lm - 2.0 * l0 + lp;
            if (denom < 0.0) shift = std::clamp(0.5 * (lm - lp) / denom, -0.5, 0.5);
        }

        // Half-prominence width in bins.
        const double half = psd[k] - 0.5 * c.prominence;
        std::size_t li = k, ri = k;
        while (li > 1 && psd[li] > half) --li;
        while (ri + 1 < psd.size() && psd[ri] > half) ++ri;

        Peak p;
        p.nu = nu[k] + shift * dnu;
        p.height = psd[k];
        p.prominence = c.prominence;
        p.width = static_cast<double>(ri - li) * dnu;
        out.peaks.push_back(p);
    }
    std::sort(out.peaks.begin(), out.peaks.end(),
              [](const Peak& a, const Peak& b) { return a.nu < b.nu; });
    return out;
}

enum class CouplingSign { positive, negative, undetermined };

inline std::string coupling_sign_name(CouplingSign s) {
    switch (s) {
        case CouplingSign::positive: return "+1";
        case CouplingSign::negative: return "-1";
        default: return "undetermined";
    }
}

// One peak-to-transition pairing of the fit.
struct RoleAssignment {
    int role = 0;          // 1..4
    double peak_nu = 0.0;  // detected position
    double model_nu = 0.0; // fitted transition position
};

struct EstimatedParams {
    double delta_hat = 0.0;
    double g_hat_magnitude = 0.0;
    CouplingSign g_sign = CouplingSign::undetermined;
    double residual = 0.0;  // RMS misfit of assigned peaks, omega units
    std::vector<RoleAssignment> assignment;
    // Raw-peak identity mismatches |w1-(w3-w2)| and |w4-(w2+w3)|; NaN when
    // the roles involved were not all assigned.
    double identity_residual_1 = std::numeric_limits<double>::quiet_NaN();
    double identity_residual_4 = std::numeric_limits<double>::quiet_NaN();
};

struct InvertOptions {
    double rms_tol = 2.0 * std::numbers::pi * 0.01;  // accept threshold, omega units
    double merge_tol_nu = 0.01;  // peaks closer than this are one line
};

namespace detail {

// Preference used only to break exact residual ties (typically the
// two-peak case, where any role pair fits exactly): the single-quantum
// lines omega2, omega3 dominate generic spectra, so role sets containing
// both rank first.
inline int role_subset_rank(unsigned mask) {
    // Bit i-1 stands for role i.  Ordered within each subset size; ties only
    // arise between assignments of the same size.
    static constexpr unsigned kOrder[] = {
        0b1111,                                  // {1,2,3,4}
        0b1110, 0b0111, 0b1101, 0b1011,          // triples, {2,3} subsets first
        0b0110, 0b0101, 0b1010, 0b1001, 0b0011, 0b1100,  // pairs, {2,3} first
    };
    int rank = 0;
    for (unsigned m : kOrder) {
        if (m == mask) return rank;
        ++rank;
    }
    return rank + static_cast<int>(mask);
}

struct FitResult {
    bool feasible = false;
    double u = 0.0;  // |g|
    double s = 0.0;  // sqrt(delta^2 + g^2)
    double rms = 0.0;
};

// Least squares over (delta, |g|).  In the variables u = |g| and
// s = sqrt(delta^2 + g^2) every transition is linear: omega1 = 2u,
// omega2 = s - u, omega3 = s + u, omega4 = 2s, so the fit is an exact
// 2x2 normal-equation solve; feasibility needs s > u >= 0.
inline FitResult fit_roles(std::span<const int> roles, std::span<const double> omegas) {
    static constexpr double kA[5] = {0.0, 2.0, -1.0, 1.0, 0.0};  // coefficient of u per role
    static constexpr double kB[5] = {0.0, 0.0, 1.0, 1.0, 2.0};   // coefficient of s per role
    double aa = 0.0, ab = 0.0, bb = 0.0, aw = 0.0, bw = 0.0;
    for (std::size_t i = 0; i < roles.size(); ++i) {
        const double a = kA[roles[i]], b = kB[roles[i]], w = omegas[i];
        aa += a * a;
        ab += a * b;
        bb += b * b;
        aw += a * w;
        bw += b * w;
    }
    const double det = aa * bb - ab * ab;
    FitResult r;
    if (std::abs(det) < 1e-12) return r;
    r.u = (aw * bb - bw * ab) / det;
    r.s = (bw * aa - aw * ab) / det;
    if (!(r.s > 0.0) || r.u < 0.0 || !(r.s * r.s - r.u * r.u > 0.0)) return r;
    double ss = 0.0;
    for (std::size_t i = 0; i < roles.size(); ++i) {
        const double model = kA[roles[i]] * r.u + kB[roles[i]] * r.s;
        ss += (model - omegas[i]) * (model - omegas[i]);
    }
    r.rms = std::sqrt(ss / static_cast<double>(roles.size()));
    r.feasible = true;
    return r;
}

inline std::vector<Peak> merge_peak_sets(const PeakSet& x, const PeakSet& z, double tol_nu) {
    std::vector<Peak> all = x.peaks;
    all.insert(all.end(), z.peaks.begin(), z.peaks.end());
    std::sort(all.begin(), all.end(), [](const Peak& a, const Peak& b) { return a.nu < b.nu; });
    std::vector<Peak> merged;
    for (const auto& p : all) {
        if (!merged.empty() && p.nu - merged.back().nu < tol_nu) {
            // Same line seen in both spectra: keep a prominence-weighted position.
            Peak& m = merged.back();
            const double w1 = m.prominence, w2 = p.prominence;
            m.nu = (m.nu * w1 + p.nu * w2) / (w1 + w2);
            m.height = std::max(m.height, p.height);
            m.prominence = std::max(m.prominence, p.prominence);
        } else {
            merged.push_back(p);
        }
    }
    return merged;
}

}  // namespace detail

// Recovers (delta, |g|) from detected peaks.  Peaks from both spectra are
// merged, then every injective assignment of a peak subset to transition
// roles is scored; assignments using more peaks win when their RMS misfit is
// below rms_tol, residual ties break by a fixed role-subset preference.  The
// coupling sign is never inferred here: spectra are even in g.
inline EstimatedParams invert_parameters(const PeakSet& peaks_x, const PeakSet& peaks_z,
                                         const InvertOptions& opt = {}) {
    const std::vector<Peak> peaks =
        detail::merge_peak_sets(peaks_x, peaks_z, opt.merge_tol_nu);
    const std::size_t n = peaks.size();
    if (n < 2)
        throw InsufficientDataError("invert_parameters: need at least 2 peaks, have " +
                                    std::to_string(n));

    struct Best {
        bool set = false;
        detail::FitResult fit;
        std::vector<int> roles;       // role per chosen peak
        std::vector<std::size_t> idx; // chosen peak indices
        int subset_rank = 0;
    };
    Best best;
    bool any_feasible = false;

    // Enumerate ordered role tuples over peak subsets, largest subsets first.
    const std::size_t k_max = std::min<std::size_t>(4, n);
    for (std::size_t k = k_max; k >= 2; --k) {
        Best level_best;
        std::vector<std::size_t> idx(k);
        std::vector<int> roles(k);
        std::vector<double> omegas(k);

        // Choose k peak indices (combinations), then permute roles over them.
        std::vector<std::size_t> choose(k);
        for (std::size_t i = 0; i < k; ++i) choose[i] = i;
        while (true) {
            // All injective role tuples for this combination.
            std::vector<int> sel(k);
            std::vector<bool> used(5, false);
            // Recursive enumeration without heap churn.
            auto enumerate = [&](auto&& self, std::size_t depth) -> void {
                if (depth == k) {
                    unsigned mask = 0;
                    for (std::size_t i = 0; i < k; ++i) {
                        roles[i] = sel[i];
                        omegas[i] = 2.0 * std::numbers::pi * peaks[choose[i]].nu;
                        mask |= 1u << (sel[i] - 1);
                    }
                    const auto fit = detail::fit_roles(roles, omegas);
                    if (!fit.feasible) return;
                    any_feasible = true;
                    const int rank = detail::role_subset_rank(mask);
                    const bool better =
                        !level_best.set || fit.rms < level_best.fit.rms - 1e-12 ||
                        (std::abs(fit.rms - level_best.fit.rms) <= 1e-12 &&
                         rank < level_best.subset_rank);
                    if (better) {
                        level_best.set = true;
                        level_best.fit = fit;
                        level_best.roles.assign(roles.begin(), roles.end());
                        level_best.idx.assign(choose.begin(), choose.end());
                        level_best.subset_rank = rank;
                    }
                    return;
                }
                for (int r = 1; r <= 4; ++r) {
                    if (used[r]) continue;
                    used[r] = true;
                    sel[depth] = r;
                    self(self, depth + 1);
                    used[r] = false;
                }
            };
            enumerate(enumerate, 0);

            // Next combination.
            std::size_t i = k;
            while (i > 0 && choose[i - 1] == n - k + i - 1) --i;
            if (i == 0) break;
            ++choose[i - 1];
            for (std::size_t j = i; j < k; ++j) choose[j] = choose[j - 1] + 1;
        }

        if (level_best.set && level_best.fit.rms <= opt.rms_tol) {
            best = level_best;
            break;
        }
        if (level_best.set && !best.set) best = level_best;  // fallback if nothing passes
        if (k == 2) break;
    }

    if (!any_feasible || !best.set)
        throw InsufficientDataError("invert_parameters: no feasible peak-to-transition "
                                    "assignment (delta^2 would not be positive)");

    EstimatedParams est;
    est.g_hat_magnitude = best.fit.u;
    est.delta_hat = std::sqrt(best.fit.s * best.fit.s - best.fit.u * best.fit.u);
    est.residual = best.fit.rms;
    est.g_sign = CouplingSign::undetermined;

    const TransitionSet model = transition_frequencies(est.delta_hat, est.g_hat_magnitude);
    const std::array<double, 4> model_nu = model.nus();
    std::array<double, 4> raw_omega{};
    std::array<bool, 4> have{};
    for (std::size_t i = 0; i < best.roles.size(); ++i) {
        RoleAssignment ra;
        ra.role = best.roles[i];
        ra.peak_nu = peaks[best.idx[i]].nu;
        ra.model_nu = model_nu[static_cast<std::size_t>(ra.role - 1)];
        est.assignment.push_back(ra);
        raw_omega[static_cast<std::size_t>(ra.role - 1)] = 2.0 * std::numbers::pi * ra.peak_nu;
        have[static_cast<std::size_t>(ra.role - 1)] = true;
    }
    std::sort(est.assignment.begin(), est.assignment.end(),
              [](const RoleAssignment& a, const RoleAssignment& b) { return a.role < b.role; });
    if (have[0] && have[1] && have[2])
        est.identity_residual_1 = std::abs(raw_omega[0] - (raw_omega[2] - raw_omega[1]));
    if (have[3] && have[1] && have[2])
        est.identity_residual_4 = std::abs(raw_omega[3] - (raw_omega[1] + raw_omega[2]));
    return est;
}

struct CorrelationResult {
    double r = 0.0;
    long long n = 0;
    double g_value = 0.0;
    double std_error = 0.0;  // of r; spread over trajectories for ensembles
};

// Sample Pearson correlation coefficient of two equal-length series.
inline CorrelationResult pearson_r(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw ValidationError("pearson_r: series lengths differ");
    if (x.size() < 2)
        throw InsufficientDataError("pearson_r: need at least 2 samples");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw InsufficientDataError("pearson_r: a series has zero variance");
    CorrelationResult res;
    res.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    res.n = static_cast<long long>(x.size());
    return res;
}

// Ensemble correlation between the two qubits' x observables at one g:
// per-trajectory Pearson r averaged over the ensemble.
inline CorrelationResult ensemble_correlation(const std::vector<Trajectory>& trajectories,
                                              double g_value) {
    if (trajectories.empty()) throw InsufficientDataError("ensemble_correlation: no trajectories");
    double sum = 0.0, sum2 = 0.0;
    long long n_total = 0;
    for (const auto& traj : trajectories) {
        const auto res = pearson_r(traj.series(c0x), traj.series(cx0));
        sum += res.r;
        sum2 += res.r * res.r;
        n_total += res.n;
    }
    const double m = static_cast<double>(trajectories.size());
    CorrelationResult out;
    out.r = sum / m;
    out.n = n_total;
    out.g_value = g_value;
    if (trajectories.size() > 1) {
        const double var = std::max(0.0, (sum2 - sum * sum / m) / (m - 1.0));
        out.std_error = std::sqrt(var / m);
    }
    return out;
}

// Correlation vs coupling sweep with a fixed common seed set across g values
// (paired noise realizations sharpen the comparison).
inline std::vector<CorrelationResult> correlation_sweep(std::span<const double> g_grid,
                                                        const SystemParams& base,
                                                        const NoiseSpec& noise,
                                                        const SimConfig& sim_config,
                                                        int workers = 1) {
    if (g_grid.empty()) throw ValidationError("correlation_sweep: empty g grid");
    std::vector<CorrelationResult> out;
    out.reserve(g_grid.size());
    for (double g : g_grid) {
        SystemParams p = base;
        p.g = g;
        SimConfig cfg = sim_config;
        cfg.initial_state = thermal_state(p);
        if (!cfg.record.empty()) {
            bool ok0x = false, okx0 = false;
            for (Comp c : cfg.record) {
                ok0x |= (c == c0x);
                okx0 |= (c == cx0);
            }
            if (!ok0x || !okx0) cfg.record = {c0x, cx0};
        }
        const auto trajs = run_ensemble(cfg, p, noise, workers);
        out.push_back(ensemble_correlation(trajs, g));
    }
    return out;
}

}  // namespace noisespec

#endif
