#pragma once

#include <cmath>
#include <stdexcept>

namespace pinnelast::oracle {

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One sampled field state: displacements and plane stress/strain components.
struct FieldState {
    double u = 0, v = 0, s11 = 0, s22 = 0, s12 = 0;
};

/// Uniform uniaxial tension T along x in plane stress (no hole).
inline FieldState uniaxial_fields(double x, double y, double T, double E, double nu) {
    return FieldState{T * x / E, -nu * T * y / E, T, 0.0, 0.0};
}

/// Infinite plate with a circular hole of radius `a` under remote uniaxial
/// tension T along x, plane stress. Classical closed form; displacements use
/// the Kolosov constant kappa = (3 - nu)/(1 + nu).
inline FieldState kirsch_fields(double x, double y, double T, double a, double E, double nu) {
    const double r2 = x * x + y * y;
    const double r = std::sqrt(r2);
    if (r < a * (1.0 - 1e-12)) throw DomainError("kirsch_fields: point inside the hole");
    const double th = std::atan2(y, x);
    const double c2 = std::cos(2 * th), s2 = std::sin(2 * th);
    const double ar2 = a * a / r2;
    const double ar4 = ar2 * ar2;

    const double srr = 0.5 * T * (1 - ar2) + 0.5 * T * (1 - 4 * ar2 + 3 * ar4) * c2;
    const double stt = 0.5 * T * (1 + ar2) - 0.5 * T * (1 + 3 * ar4) * c2;
    const double srt = -0.5 * T * (1 + 2 * ar2 - 3 * ar4) * s2;

    const double ct = std::cos(th), st = std::sin(th);
    FieldState f;
    f.s11 = srr * ct * ct + stt * st * st - 2 * srt * st * ct;
    f.s22 = srr * st * st + stt * ct * ct + 2 * srt * st * ct;
    f.s12 = (srr - stt) * st * ct + srt * (ct * ct - st * st);

    const double mu = E / (2 * (1 + nu));
    const double kappa = (3 - nu) / (1 + nu);
    const double ur =
        T / (8 * mu) *
        (r * (kappa - 1) + 2 * a * a / r +
         (2 * r + (2 * a * a / r) * (1 + kappa) - 2 * a * a * a * a / (r2 * r)) * c2);
    const double ut = -T / (8 * mu) *
                      (2 * r + (2 * a * a / r) * (kappa - 1) + 2 * a * a * a * a / (r2 * r)) * s2;
    f.u = ur * ct - ut * st;
    f.v = ur * st + ut * ct;
    return f;
}

/// Traction exerted by the Kirsch stress field across a surface with unit
/// normal (nx, ny).
inline void kirsch_traction(double x, double y, double T, double a, double E, double nu,
                            double nx, double ny, double& tx, double& ty) {
    const FieldState f = kirsch_fields(x, y, T, a, E, nu);
    tx = f.s11 * nx + f.s12 * ny;
    ty = f.s12 * nx + f.s22 * ny;
}

/// d'Alembert solution of the 1D wave equation for zero initial velocity.
template <class F>
double dalembert_1d(F&& profile, double x, double t, double c) {
    return 0.5 * (profile(x - c * t) + profile(x + c * t));
}

}  // namespace pinnelast::oracle
