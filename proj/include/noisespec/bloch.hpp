#ifndef NOISESPEC_BLOCH_HPP
#define NOISESPEC_BLOCH_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>

#include "noisespec/errors.hpp"
#include "noisespec/types.hpp"

namespace noisespec {

// Component index of the two-qubit Bloch tensor Pi_ab.  The density matrix
// expands as rho = 1/4 sum_ab Pi_ab sigma^1_a x sigma^2_b over a,b in
// {0,x,y,z}; Pi_00 == 1 is implicit and never stored, leaving the 15 real
// components below as the simulation state.  The first index belongs to
// qubit 1, the second to qubit 2, so pi_0x is an observable of qubit 2 and
// pi_x0 one of qubit 1.
enum Comp : int {
    c0x = 0, c0y, c0z,
    cx0, cy0, cz0,
    cxx, cxy, cyx, cxz, czx,
    cyy, cyz, czy, czz,
};

inline constexpr std::size_t kNumComponents = 15;

inline constexpr std::array<std::string_view, kNumComponents> kComponentNames = {
    "pi_0x", "pi_0y", "pi_0z",
    "pi_x0", "pi_y0", "pi_z0",
    "pi_xx", "pi_xy", "pi_yx", "pi_xz", "pi_zx",
    "pi_yy", "pi_yz", "pi_zy", "pi_zz",
};

inline std::string_view component_name(Comp c) { return kComponentNames[static_cast<int>(c)]; }

inline Comp parse_component(std::string_view name) {
    for (std::size_t i = 0; i < kNumComponents; ++i)
        if (kComponentNames[i] == name) return static_cast<Comp>(i);
    throw ValidationError("unknown tensor component '" + std::string(name) + "'");
}

// Pauli labels (a, b) of a component, each in {0='0', 'x', 'y', 'z'}.
inline std::pair<char, char> component_labels(Comp c) {
    const std::string_view n = component_name(c);
    return {n[3], n[4]};
}

struct BlochTensor15 {
    std::array<double, kNumComponents> v{};

    double& operator[](Comp c) { return v[static_cast<int>(c)]; }
    double operator[](Comp c) const { return v[static_cast<int>(c)]; }
    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }

    bool is_finite() const {
        double s = 0.0;
        for (double x : v) s += x;
        return std::isfinite(s);
    }

    // Squared norms of the two single-qubit Bloch vectors.
    double bloch_norm2_qubit1() const { return v[cx0] * v[cx0] + v[cy0] * v[cy0] + v[cz0] * v[cz0]; }
    double bloch_norm2_qubit2() const { return v[c0x] * v[c0x] + v[c0y] * v[c0y] + v[c0z] * v[c0z]; }

    double max_abs() const {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
};

// Purity Tr rho^2 of the reconstructed density matrix.  The Pauli products
// are trace-orthogonal, so Tr rho^2 = (1 + sum_ab Pi_ab^2) / 4.
inline double purity(const BlochTensor15& s) {
    double n2 = 0.0;
    for (double x : s.v) n2 += x * x;
    return 0.25 * (1.0 + n2);
}

// State with the single-qubit sectors set to the given Bloch vectors and all
// nine mixed components zero.  This is the non-entangled embedding used by
// the g = 0 dynamics, where the mixed block stays decoupled from the sectors.
inline BlochTensor15 product_state(const std::array<double, 3>& bloch1,
                                   const std::array<double, 3>& bloch2) {
    auto norm2 = [](const std::array<double, 3>& b) {
        return b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
    };
    if (norm2(bloch1) > 1.0 + 1e-12 || norm2(bloch2) > 1.0 + 1e-12)
        throw ValidationError("product_state: Bloch vector norm exceeds 1");
    BlochTensor15 s;
    s[cx0] = bloch1[0];
    s[cy0] = bloch1[1];
    s[cz0] = bloch1[2];
    s[c0x] = bloch2[0];
    s[c0y] = bloch2[1];
    s[c0z] = bloch2[2];
    return s;
}

// Thermal state of the uncoupled system: diagonal sectors at their
// equilibrium values, everything else zero.  Fixed point of the g = 0,
// zero-bias dynamics for any rates.
inline BlochTensor15 thermal_state(const SystemParams& p) {
    BlochTensor15 s;
    s[cz0] = p.z_t1;
    s[c0z] = p.z_t2;
    s[czz] = p.z_t1 * p.z_t2;
    return s;
}

}  // namespace noisespec

#endif
