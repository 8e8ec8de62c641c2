#ifndef NOISESPEC_NOISE_HPP
#define NOISESPEC_NOISE_HPP

#include <cmath>
#include <cstdint>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "noisespec/errors.hpp"
#include "noisespec/types.hpp"

namespace noisespec {

// White Gaussian bias noise, zero mean and delta-correlated with intensity D.
// Discretized as eps_j(t_k) = sqrt(2 D / dt) * eta_jk with eta standard
// normal, independent per qubit and per trajectory.  The (master_seed,
// trajectory, qubit) triple fully determines a stream.
struct NoiseSpec {
    double intensity_d = 0.0;
    std::uint64_t master_seed = 1;

    void validate() const {
        if (!std::isfinite(intensity_d) || intensity_d < 0.0)
            throw ValidationError("noise.d: must be finite and >= 0");
    }
};

namespace detail {

// splitmix64 finalizer; used to hash (master_seed, trajectory, qubit) into
// a stream seed.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace detail

inline std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t trajectory,
                                 unsigned qubit) {
    return detail::mix64(detail::mix64(master_seed ^ detail::mix64(trajectory + 1)) + qubit);
}

// Standard-normal stream over mt19937_64 with the Marsaglia polar transform.
// Both the engine and the transform are fully specified, so sequences are
// bit-identical for a given seed on any platform.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : eng_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = uniform_pm1();
            v = uniform_pm1();
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

private:
    double uniform_pm1() {
        // 53-bit uniform in [0,1), mapped to (-1,1).
        const double u01 = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
        return 2.0 * u01 - 1.0;
    }

    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Per-trajectory bias source: two independent per-qubit Gaussian streams
// scaled to per-step variance 2 D / dt.
class NoiseStream {
public:
    NoiseStream(const NoiseSpec& spec, double dt, std::uint64_t trajectory)
        : q1_(stream_seed(spec.master_seed, trajectory, 1)),
          q2_(stream_seed(spec.master_seed, trajectory, 2)),
          amplitude_(std::sqrt(2.0 * spec.intensity_d / dt)) {
        spec.validate();
        if (!(dt > 0.0)) throw ValidationError("noise stream: dt must be > 0");
    }

    BiasPair next() { return {amplitude_ * q1_.next(), amplitude_ * q2_.next()}; }

    double amplitude() const { return amplitude_; }

private:
    GaussianStream q1_, q2_;
    double amplitude_;
};

struct NoisePath {
    double dt = 0.0;
    std::uint64_t master_seed = 0;
    std::uint64_t trajectory = 0;
    std::vector<BiasPair> samples;
};

inline constexpr std::size_t kDefaultPathBudgetBytes = std::size_t(1) << 30;

inline NoisePath generate_path(const NoiseSpec& spec, double dt, std::size_t n_steps,
                               std::uint64_t trajectory,
                               std::size_t budget_bytes = kDefaultPathBudgetBytes) {
    spec.validate();
    if (!(dt > 0.0)) throw ValidationError("generate_path: dt must be > 0");
    if (n_steps < 1) throw ValidationError("generate_path: n_steps must be >= 1");
    if (n_steps > budget_bytes / sizeof(BiasPair))
        throw ValidationError("generate_path: recording budget exceeded (" +
                              std::to_string(n_steps * sizeof(BiasPair)) + " bytes needed)");

    NoisePath path;
    path.dt = dt;
    path.master_seed = spec.master_seed;
    path.trajectory = trajectory;
    path.samples.reserve(n_steps);
    NoiseStream stream(spec, dt, trajectory);
    for (std::size_t i = 0; i < n_steps; ++i) path.samples.push_back(stream.next());
    return path;
}

struct NoiseMoments {
    double mean1 = 0.0;
    double mean2 = 0.0;
    double var1 = 0.0;
    double var2 = 0.0;
    double cross_covariance = 0.0;
};

inline NoiseMoments noise_statistics(const NoisePath& path) {
    if (path.samples.empty()) throw ValidationError("noise_statistics: empty path");
    const double n = static_cast<double>(path.samples.size());
    NoiseMoments m;
    for (const auto& b : path.samples) {
        m.mean1 += b.eps1;
        m.mean2 += b.eps2;
    }
    m.mean1 /= n;
    m.mean2 /= n;
    for (const auto& b : path.samples) {
        const double d1 = b.eps1 - m.mean1, d2 = b.eps2 - m.mean2;
        m.var1 += d1 * d1;
        m.var2 += d2 * d2;
        m.cross_covariance += d1 * d2;
    }
    m.var1 /= n;
    m.var2 /= n;
    m.cross_covariance /= n;
    return m;
}

}  // namespace noisespec

#endif
