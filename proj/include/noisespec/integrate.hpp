#ifndef NOISESPEC_INTEGRATE_HPP
#define NOISESPEC_INTEGRATE_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "noisespec/bloch.hpp"
#include "noisespec/errors.hpp"
#include "noisespec/model.hpp"
#include "noisespec/noise.hpp"
#include "noisespec/types.hpp"

namespace noisespec {

inline const std::vector<Comp> kDefaultRecord = {c0x, c0z, cx0, cz0};

inline std::vector<Comp> all_components() {
    std::vector<Comp> all;
    for (std::size_t i = 0; i < kNumComponents; ++i) all.push_back(static_cast<Comp>(i));
    return all;
}

struct SimConfig {
    double dt = 0.005;
    double t_max = 2000.0;
    double burn_in = 50.0;
    int record_stride = 10;
    int n_trajectories = 64;
    BlochTensor15 initial_state{};
    std::vector<Comp> record = kDefaultRecord;
    std::size_t memory_budget_bytes = std::size_t(2) << 30;

    long long n_steps() const { return std::llround(t_max / dt); }
    long long burn_steps() const { return std::llround(burn_in / dt); }
    long long n_samples() const { return (n_steps() - burn_steps()) / record_stride; }
    double dt_record() const { return dt * record_stride; }

    void validate() const {
        if (!(dt > 0.0)) throw ValidationError("sim.dt: must be > 0");
        if (!(t_max >= dt)) throw ValidationError("sim.t_max: must be >= dt");
        if (burn_in < 0.0) throw ValidationError("sim.burn_in: must be >= 0");
        if (record_stride < 1) throw ValidationError("sim.record_stride: must be >= 1");
        if (n_trajectories < 1) throw ValidationError("sim.n_trajectories: must be >= 1");
        if (record.empty()) throw ValidationError("sim.components: must name at least one component");
        if (!initial_state.is_finite()) throw ValidationError("sim.initial: non-finite state");
        if (n_samples() < 1)
            throw ValidationError("sim: no samples recorded (t_max too close to burn_in)");
    }

    // Explicit first-order stepping needs dt well below the fastest scale.
    void validate_against(const SystemParams& p) const {
        validate();
        p.validate();
        double fastest = std::max({p.delta1, p.delta2, std::abs(p.g), p.gamma_phi1,
                                   p.gamma_phi2, p.gamma_r1, p.gamma_r2});
        if (fastest > 0.0 && dt > 0.1 / fastest)
            throw ValidationError("sim.dt: exceeds stability bound 0.1/max(delta, |g|, rates) = " +
                                  std::to_string(0.1 / fastest));
    }

    std::size_t bytes_needed() const {
        return static_cast<std::size_t>(n_trajectories) * static_cast<std::size_t>(n_samples()) *
               record.size() * sizeof(double);
    }
};

// Uniformly sampled recording of selected tensor components.  Sample k holds
// the state at t0 + (k+1) * dt_record.
struct Trajectory {
    double dt_record = 0.0;
    double t0 = 0.0;  // burn-in end; first sample is one recording interval later
    std::uint64_t trajectory_index = 0;
    std::uint64_t master_seed = 0;
    std::vector<Comp> components;
    std::vector<std::vector<double>> data;  // per component, same length

    std::size_t size() const { return data.empty() ? 0 : data.front().size(); }

    double time_of(std::size_t k) const { return t0 + dt_record * static_cast<double>(k + 1); }

    std::span<const double> series(Comp c) const {
        for (std::size_t i = 0; i < components.size(); ++i)
            if (components[i] == c) return data[i];
        throw ValidationError("trajectory: component '" + std::string(component_name(c)) +
                              "' was not recorded");
    }

    bool has(Comp c) const {
        for (Comp rc : components)
            if (rc == c) return true;
        return false;
    }
};

// One Euler-Maruyama (Ito) step.  The bias sample already carries the
// sqrt(2D/dt) magnitude, so this is simply state + dt * rhs.
inline BlochTensor15 step_euler_maruyama(const BlochTensor15& state, const SystemParams& params,
                                         const BiasPair& bias, double dt) {
    const BlochTensor15 d = detail::rhs_unchecked(state, params, bias);
    BlochTensor15 out;
    for (std::size_t i = 0; i < kNumComponents; ++i) out[i] = state[i] + dt * d[i];
    return out;
}

namespace detail {

// Classical RK4 step at constant bias, local error O(dt^5).
inline BlochTensor15 step_rk4(const BlochTensor15& s, const SystemParams& p, const BiasPair& b,
                              double dt) {
    const BlochTensor15 k1 = rhs_unchecked(s, p, b);
    BlochTensor15 t;
    for (std::size_t i = 0; i < kNumComponents; ++i) t[i] = s[i] + 0.5 * dt * k1[i];
    const BlochTensor15 k2 = rhs_unchecked(t, p, b);
    for (std::size_t i = 0; i < kNumComponents; ++i) t[i] = s[i] + 0.5 * dt * k2[i];
    const BlochTensor15 k3 = rhs_unchecked(t, p, b);
    for (std::size_t i = 0; i < kNumComponents; ++i) t[i] = s[i] + dt * k3[i];
    const BlochTensor15 k4 = rhs_unchecked(t, p, b);
    BlochTensor15 out;
    for (std::size_t i = 0; i < kNumComponents; ++i)
        out[i] = s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

inline void check_finite(const BlochTensor15& s, long long step) {
    if (!s.is_finite())
        throw DivergenceError("integration diverged at step " + std::to_string(step), step);
}

}  // namespace detail

// Deterministic reference integration at fixed bias (typically zero).  Used
// as the convergence oracle for the stochastic scheme and for line spectra.
inline Trajectory integrate_deterministic(BlochTensor15 state, const SystemParams& params,
                                          const BiasPair& fixed_bias, double dt, double t_max,
                                          int record_stride = 1,
                                          std::vector<Comp> record = all_components()) {
    params.validate();
    fixed_bias.validate();
    if (!(dt > 0.0)) throw ValidationError("integrate_deterministic: dt must be > 0");
    if (record_stride < 1) throw ValidationError("integrate_deterministic: record_stride >= 1");

    const long long n_steps = std::llround(t_max / dt);
    Trajectory traj;
    traj.dt_record = dt * record_stride;
    traj.t0 = 0.0;
    traj.components = std::move(record);
    traj.data.assign(traj.components.size(), {});
    const std::size_t n_samples = static_cast<std::size_t>(n_steps / record_stride);
    for (auto& d : traj.data) d.reserve(n_samples);

    for (long long k = 1; k <= n_steps; ++k) {
        state = detail::step_rk4(state, params, fixed_bias, dt);
        detail::check_finite(state, k);
        if (k % record_stride == 0)
            for (std::size_t c = 0; c < traj.components.size(); ++c)
                traj.data[c].push_back(state[traj.components[c]]);
    }
    return traj;
}

namespace detail {

inline Trajectory simulate_trajectory(const SimConfig& cfg, const SystemParams& params,
                                      const NoiseSpec& noise, std::uint64_t index) {
    Trajectory traj;
    traj.dt_record = cfg.dt_record();
    traj.t0 = cfg.burn_steps() * cfg.dt;
    traj.trajectory_index = index;
    traj.master_seed = noise.master_seed;
    traj.components = cfg.record;
    traj.data.assign(cfg.record.size(), {});
    const std::size_t n_samples = static_cast<std::size_t>(cfg.n_samples());
    for (auto& d : traj.data) d.reserve(n_samples);

    NoiseStream stream(noise, cfg.dt, index);
    BlochTensor15 state = cfg.initial_state;
    const long long n_steps = cfg.n_steps();
    const long long burn = cfg.burn_steps();
    const int stride = cfg.record_stride;

    for (long long k = 1; k <= n_steps; ++k) {
        state = step_euler_maruyama(state, params, stream.next(), cfg.dt);
        check_finite(state, k);
        if (k > burn && (k - burn) % stride == 0)
            for (std::size_t c = 0; c < traj.components.size(); ++c)
                traj.data[c].push_back(state[traj.components[c]]);
    }
    return traj;
}

}  // namespace detail

// Runs n_trajectories independent trajectories.  Each trajectory is fully
// determined by (master_seed, index), so results are identical for any
// worker count; workers only bound concurrency.
inline std::vector<Trajectory> run_ensemble(const SimConfig& cfg, const SystemParams& params,
                                            const NoiseSpec& noise, int workers = 1) {
    cfg.validate_against(params);
    noise.validate();
    if (cfg.bytes_needed() > cfg.memory_budget_bytes)
        throw ValidationError("sim: recording would need " + std::to_string(cfg.bytes_needed()) +
                              " bytes, over the budget of " +
                              std::to_string(cfg.memory_budget_bytes));

    const int n = cfg.n_trajectories;
    std::vector<Trajectory> out(static_cast<std::size_t>(n));
    workers = std::max(1, std::min(workers, n));

    if (workers == 1) {
        for (int i = 0; i < n; ++i)
            out[static_cast<std::size_t>(i)] =
                detail::simulate_trajectory(cfg, params, noise, static_cast<std::uint64_t>(i));
        return out;
    }

    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            try {
                for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1))
                    out[static_cast<std::size_t>(i)] = detail::simulate_trajectory(
                        cfg, params, noise, static_cast<std::uint64_t>(i));
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

}  // namespace noisespec

#endif
