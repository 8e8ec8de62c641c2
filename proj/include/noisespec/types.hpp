#ifndef NOISESPEC_TYPES_HPP
#define NOISESPEC_TYPES_HPP

#include <cmath>
#include <string>

#include "noisespec/errors.hpp"

namespace noisespec {

// Static parameters of the two-qubit system, hbar = 1.
//
// Energies (delta1, delta2, g and the rates) share one unit; the working
// convention is delta1 = 1 with dimensionless time t*delta1.  Configs in
// other units are rescaled by normalized().  g is signed: g > 0 and g < 0
// correspond to antiferromagnetic and ferromagnetic coupling.
struct SystemParams {
    double delta1 = 1.0;      // tunneling splitting, qubit 1
    double delta2 = 1.0;      // tunneling splitting, qubit 2
    double g = 0.0;           // sigma_x x sigma_x coupling constant
    double gamma_phi1 = 0.0;  // dephasing rates
    double gamma_phi2 = 0.0;
    double gamma_r1 = 0.0;    // relaxation rates
    double gamma_r2 = 0.0;
    double z_t1 = 1.0;        // equilibrium values of the diagonal sectors
    double z_t2 = 1.0;

    void validate() const {
        auto bad = [](double x) { return !std::isfinite(x); };
        if (bad(delta1) || bad(delta2) || bad(g) || bad(gamma_phi1) || bad(gamma_phi2) ||
            bad(gamma_r1) || bad(gamma_r2) || bad(z_t1) || bad(z_t2))
            throw ValidationError("system: non-finite parameter");
        if (delta1 <= 0.0) throw ValidationError("system.delta1: must be > 0");
        if (delta2 <= 0.0) throw ValidationError("system.delta2: must be > 0");
        if (gamma_phi1 < 0.0) throw ValidationError("system.gamma_phi1: must be >= 0");
        if (gamma_phi2 < 0.0) throw ValidationError("system.gamma_phi2: must be >= 0");
        if (gamma_r1 < 0.0) throw ValidationError("system.gamma_r1: must be >= 0");
        if (gamma_r2 < 0.0) throw ValidationError("system.gamma_r2: must be >= 0");
        if (std::abs(z_t1) > 1.0) throw ValidationError("system.z_t1: must lie in [-1, 1]");
        if (std::abs(z_t2) > 1.0) throw ValidationError("system.z_t2: must lie in [-1, 1]");
    }

    // Rescale so delta1 == 1; energies divide by delta1, times multiply.
    SystemParams normalized() const {
        validate();
        SystemParams p = *this;
        const double s = delta1;
        p.delta1 = 1.0;
        p.delta2 /= s;
        p.g /= s;
        p.gamma_phi1 /= s;
        p.gamma_phi2 /= s;
        p.gamma_r1 /= s;
        p.gamma_r2 /= s;
        return p;
    }

    double energy_scale() const { return delta1; }
};

// Instantaneous bias energies eps_j(t) of the two qubits.
struct BiasPair {
    double eps1 = 0.0;
    double eps2 = 0.0;

    void validate() const {
        if (!std::isfinite(eps1) || !std::isfinite(eps2))
            throw ValidationError("bias: non-finite value");
    }
};

}  // namespace noisespec

#endif
