#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace pinnelast::elast {

enum class PlaneMode { stress, strain };

struct MaterialError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Linear isotropic material for 2D problems. E in MPa, rho in consistent
/// mass/volume units; rho = 0 reduces the momentum balance to statics.
struct Material {
    double E = 1.0;
    double nu = 0.3;
    double rho = 0.0;
    PlaneMode mode = PlaneMode::stress;

    void validate() const {
        if (!(E > 0)) throw MaterialError("material: E must be positive");
        if (!(nu > -1.0 && nu < 0.5)) throw MaterialError("material: nu must lie in (-1, 0.5)");
        if (nu == 0.5 && mode == PlaneMode::strain)
            throw MaterialError("material: nu = 0.5 is singular in plane strain");
        if (!(rho >= 0)) throw MaterialError("material: rho must be nonnegative");
    }

    /// P- and S-wave speeds (plane strain uses the 2D Lame constants).
    double p_wave_speed() const {
        const double mu = E / (2 * (1 + nu));
        double lam;
        if (mode == PlaneMode::strain) lam = E * nu / ((1 + nu) * (1 - 2 * nu));
        else lam = E * nu / (1 - nu * nu);  // plane-stress effective lambda
        return std::sqrt((lam + 2 * mu) / rho);
    }
    double s_wave_speed() const { return std::sqrt(E / (2 * (1 + nu)) / rho); }
};

/// Voigt constitutive matrix mapping [e11, e22, g12] to [s11, s22, s12].
inline std::array<std::array<double, 3>, 3> constitutive_matrix(const Material& m) {
    m.validate();
    if (m.mode == PlaneMode::strain && std::abs(m.nu - 0.5) < 1e-14)
        throw MaterialError("constitutive_matrix: singular material (nu = 0.5, plane strain)");
    std::array<std::array<double, 3>, 3> C{};
    if (m.mode == PlaneMode::stress) {
        const double f = m.E / (1 - m.nu * m.nu);
        C[0] = {f, f * m.nu, 0};
        C[1] = {f * m.nu, f, 0};
        C[2] = {0, 0, f * (1 - m.nu) / 2};
    } else {
        const double f = m.E / ((1 + m.nu) * (1 - 2 * m.nu));
        C[0] = {f * (1 - m.nu), f * m.nu, 0};
        C[1] = {f * m.nu, f * (1 - m.nu), 0};
        C[2] = {0, 0, f * (1 - 2 * m.nu) / 2};
    }
    return C;
}

/// Equivalent (von Mises) stress. Plane strain includes s33 = nu (s11 + s22).
inline double von_mises(double s11, double s22, double s12, PlaneMode mode, double nu) {
    if (mode == PlaneMode::stress)
        return std::sqrt(s11 * s11 - s11 * s22 + s22 * s22 + 3 * s12 * s12);
    const double s33 = nu * (s11 + s22);
    return std::sqrt(0.5 * ((s11 - s22) * (s11 - s22) + (s22 - s33) * (s22 - s33) +
                            (s33 - s11) * (s33 - s11)) +
                     3 * s12 * s12);
}

}  // namespace pinnelast::elast
