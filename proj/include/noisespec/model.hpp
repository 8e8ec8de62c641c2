#ifndef NOISESPEC_MODEL_HPP
#define NOISESPEC_MODEL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

#include "noisespec/bloch.hpp"
#include "noisespec/errors.hpp"
#include "noisespec/types.hpp"

namespace noisespec {

namespace detail {

// Time derivative of the Bloch tensor under
//   H = -1/2 (delta1 sz x 1 + delta2 1 x sz) - 1/2 (eps1 sx x 1 + eps2 1 x sx)
//       + g sx x sx
// plus the phenomenological dissipator: each Pi_ab is damped at
// gamma1(a) + gamma2(b) with gamma_j(0) = 0, gamma_j(x) = gamma_j(y) =
// gamma_phi_j and gamma_j(z) = gamma_r_j, and the three z-sector lines relax
// toward z_t2, z_t1 and z_t1*z_t2.
//
// The unitary part is the commutator -i[H, rho] written out in components;
// it is an antisymmetric generator, so it conserves sum Pi_ab^2.  Note the
// yx line couples eps1 to Pi_zx, the qubit-swap image of the eps2*Pi_xz term
// in the xy line.
inline BlochTensor15 rhs_unchecked(const BlochTensor15& s, const SystemParams& p,
                                   const BiasPair& bias) {
    const double d1 = p.delta1, d2 = p.delta2, g = p.g;
    const double gp1 = p.gamma_phi1, gp2 = p.gamma_phi2;
    const double gr1 = p.gamma_r1, gr2 = p.gamma_r2;
    const double e1 = bias.eps1, e2 = bias.eps2;

    BlochTensor15 d;
    d[c0x] = d2 * s[c0y] - gp2 * s[c0x];
    d[c0y] = -d2 * s[c0x] + e2 * s[c0z] - 2.0 * g * s[cxz] - gp2 * s[c0y];
    d[c0z] = -e2 * s[c0y] + 2.0 * g * s[cxy] - gr2 * (s[c0z] - p.z_t2);

    d[cx0] = d1 * s[cy0] - gp1 * s[cx0];
    d[cy0] = -d1 * s[cx0] + e1 * s[cz0] - 2.0 * g * s[czx] - gp1 * s[cy0];
    d[cz0] = -e1 * s[cy0] + 2.0 * g * s[cyx] - gr1 * (s[cz0] - p.z_t1);

    d[cxx] = d2 * s[cxy] + d1 * s[cyx] - (gp1 + gp2) * s[cxx];

    d[cxy] = -2.0 * g * s[c0z] - d2 * s[cxx] + d1 * s[cyy] + e2 * s[cxz] - (gp1 + gp2) * s[cxy];
    d[cyx] = -2.0 * g * s[cz0] - d1 * s[cxx] + d2 * s[cyy] + e1 * s[czx] - (gp1 + gp2) * s[cyx];
    d[cxz] = 2.0 * g * s[c0y] - e2 * s[cxy] + d1 * s[cyz] - (gp1 + gr2) * s[cxz];
    d[czx] = 2.0 * g * s[cy0] - e1 * s[cyx] + d2 * s[czy] - (gr1 + gp2) * s[czx];

    d[cyy] = -d1 * s[cxy] - d2 * s[cyx] + e2 * s[cyz] + e1 * s[czy] - (gp1 + gp2) * s[cyy];

    d[cyz] = -d1 * s[cxz] - e2 * s[cyy] + e1 * s[czz] - (gp1 + gr2) * s[cyz];
    d[czy] = -d2 * s[czx] - e1 * s[cyy] + e2 * s[czz] - (gr1 + gp2) * s[czy];

    d[czz] = -e1 * s[cyz] - e2 * s[czy] - (gr1 + gr2) * (s[czz] - p.z_t1 * p.z_t2);
    return d;
}

}  // namespace detail

// Validating entry point; the integrators use detail::rhs_unchecked after
// validating params once.
inline BlochTensor15 deterministic_rhs(const BlochTensor15& state, const SystemParams& params,
                                       const BiasPair& bias) {
    params.validate();
    bias.validate();
    if (!state.is_finite()) throw ValidationError("deterministic_rhs: non-finite state");
    return detail::rhs_unchecked(state, params, bias);
}

// 4x4 real symmetric matrix, row-major.
struct Mat4 {
    std::array<double, 16> a{};

    double& at(int r, int c) { return a[4 * r + c]; }
    double at(int r, int c) const { return a[4 * r + c]; }

    double max_abs() const {
        double m = 0.0;
        for (double x : a) m = std::max(m, std::abs(x));
        return m;
    }

    bool is_symmetric(double tol) const {
        for (int r = 0; r < 4; ++r)
            for (int c = r + 1; c < 4; ++c)
                if (std::abs(at(r, c) - at(c, r)) > tol) return false;
        return true;
    }
};

// Two-qubit Hamiltonian in the product basis |q1 q2> with |0> the +1
// eigenstate of sigma_z, ordered |00>, |01>, |10>, |11>.
inline Mat4 build_hamiltonian(const SystemParams& p, const BiasPair& bias) {
    p.validate();
    bias.validate();
    Mat4 h;
    // -1/2 (delta1 sz x 1 + delta2 1 x sz)
    h.at(0, 0) = -0.5 * (p.delta1 + p.delta2);
    h.at(1, 1) = -0.5 * (p.delta1 - p.delta2);
    h.at(2, 2) = -0.5 * (-p.delta1 + p.delta2);
    h.at(3, 3) = 0.5 * (p.delta1 + p.delta2);
    // -1/2 eps1 sx x 1 flips qubit 1
    h.at(0, 2) = h.at(2, 0) = -0.5 * bias.eps1;
    h.at(1, 3) = h.at(3, 1) = -0.5 * bias.eps1;
    // -1/2 eps2 1 x sx flips qubit 2
    h.at(0, 1) = h.at(1, 0) = -0.5 * bias.eps2;
    h.at(2, 3) = h.at(3, 2) = -0.5 * bias.eps2;
    // g sx x sx flips both
    h.at(0, 3) = h.at(3, 0) = p.g;
    h.at(1, 2) = h.at(2, 1) = p.g;
    return h;
}

// Eigenvalues of a symmetric 4x4 matrix by cyclic Jacobi rotations,
// ascending.  Converges to machine precision in a handful of sweeps.
inline std::array<double, 4> eigen_oracle(const Mat4& h) {
    const double scale = h.max_abs();
    if (!h.is_symmetric(1e-12 * (1.0 + scale)))
        throw ValidationError("eigen_oracle: matrix is not symmetric");

    Mat4 m = h;
    for (int sweep = 0; sweep < 50; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < 4; ++p)
            for (int q = p + 1; q < 4; ++q) off += m.at(p, q) * m.at(p, q);
        if (off <= 1e-30 * (1.0 + scale * scale)) break;

        for (int p = 0; p < 4; ++p) {
            for (int q = p + 1; q < 4; ++q) {
                const double apq = m.at(p, q);
                if (apq == 0.0) continue;
                const double theta = (m.at(q, q) - m.at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                // Rotate rows/columns p and q.
                for (int k = 0; k < 4; ++k) {
                    const double mkp = m.at(k, p), mkq = m.at(k, q);
                    m.at(k, p) = c * mkp - s * mkq;
                    m.at(k, q) = s * mkp + c * mkq;
                }
                for (int k = 0; k < 4; ++k) {
                    const double mpk = m.at(p, k), mqk = m.at(q, k);
                    m.at(p, k) = c * mpk - s * mqk;
                    m.at(q, k) = s * mpk + c * mqk;
                }
            }
        }
    }

    std::array<double, 4> ev = {m.at(0, 0), m.at(1, 1), m.at(2, 2), m.at(3, 3)};
    std::sort(ev.begin(), ev.end());
    return ev;
}

}  // namespace noisespec

#endif
