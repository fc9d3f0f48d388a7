#pragma once

#include <array>
#include <cmath>

#include "pinnelast/ad/dual.hpp"
#include "pinnelast/elast/material.hpp"
#include "pinnelast/geom/distance.hpp"

namespace pinnelast::elast {

/// Body force density; zero or constant in every shipped problem.
struct BodyForce {
    std::array<double, 2> f{0.0, 0.0};
    std::array<double, 2> eval(double, double, double) const { return f; }
    bool is_zero() const { return f[0] == 0.0 && f[1] == 0.0; }
};

/// Mixed-variable first derivatives (and u_tt for dynamics) at one point.
template <class V>
struct FieldDerivs {
    std::array<V, 5> val{};
    std::array<V, 5> dx{};
    std::array<V, 5> dy{};
    std::array<V, 2> dt{};
    std::array<V, 2> dtt{};
    bool dynamic = false;
};

/// Displacement-only derivatives up to second order (pure-displacement form).
template <class V>
struct DispDerivs {
    std::array<V, 2> val{};
    std::array<V, 2> dx{}, dy{};
    std::array<V, 2> dxx{}, dyy{}, dxy{};
    std::array<V, 2> dtt{};
    bool dynamic = false;
};

/// div(sigma) + F - rho u_tt, per component.
template <class V>
std::array<V, 2> momentum_residual(const FieldDerivs<V>& f, const Material& m,
                                   const BodyForce& bf, double x, double y, double t) {
    if (m.rho > 0 && !f.dynamic)
        throw MaterialError("momentum_residual: rho > 0 requires a time-dependent model");
    const auto F = bf.eval(x, y, t);
    V rx = f.dx[geom::ch_s11] + f.dy[geom::ch_s12];
    V ry = f.dx[geom::ch_s12] + f.dy[geom::ch_s22];
    if (F[0] != 0.0) rx = rx + F[0];
    if (F[1] != 0.0) ry = ry + F[1];
    if (m.rho > 0) {
        rx = rx - m.rho * f.dtt[0];
        ry = ry - m.rho * f.dtt[1];
    }
    return {rx, ry};
}

/// sigma - C : eps(u) in Voigt order [s11, s22, s12].
template <class V>
std::array<V, 3> constitutive_residual(const FieldDerivs<V>& f, const Material& m) {
    const auto C = constitutive_matrix(m);
    const V exx = f.dx[geom::ch_u];
    const V eyy = f.dy[geom::ch_v];
    const V gxy = f.dy[geom::ch_u] + f.dx[geom::ch_v];
    return {
        f.val[geom::ch_s11] - (C[0][0] * exx + C[0][1] * eyy),
        f.val[geom::ch_s22] - (C[1][0] * exx + C[1][1] * eyy),
        f.val[geom::ch_s12] - C[2][2] * gxy,
    };
}

/// sigma . n - prescribed traction. The normal must be unit length.
template <class V>
std::array<V, 2> traction_residual(const V& s11, const V& s22, const V& s12, double nx,
                                   double ny, double tx, double ty) {
    if (std::abs(nx * nx + ny * ny - 1.0) > 1e-9)
        throw ad::ContractViolation("traction_residual: normal is not unit length");
    V rx = s11 * nx + s12 * ny;
    V ry = s12 * nx + s22 * ny;
    if (tx != 0.0) rx = rx - tx;
    if (ty != 0.0) ry = ry - ty;
    return {rx, ry};
}

/// Momentum residual of the displacement-only form: div(C:eps) + F - rho u_tt.
template <class V>
std::array<V, 2> displacement_momentum_residual(const DispDerivs<V>& d, const Material& m,
                                                const BodyForce& bf, double x, double y,
                                                double t) {
    if (m.rho > 0 && !d.dynamic)
        throw MaterialError("displacement residual: rho > 0 requires a time-dependent model");
    const auto C = constitutive_matrix(m);
    const auto F = bf.eval(x, y, t);
    // s11 = C00 u_x + C01 v_y ; s22 = C01 u_x + C11 v_y ; s12 = C22 (u_y + v_x)
    V rx = C[0][0] * d.dxx[0] + C[0][1] * d.dxy[1] + C[2][2] * (d.dyy[0] + d.dxy[1]);
    V ry = C[2][2] * (d.dxy[0] + d.dxx[1]) + C[1][0] * d.dxy[0] + C[1][1] * d.dyy[1];
    if (F[0] != 0.0) rx = rx + F[0];
    if (F[1] != 0.0) ry = ry + F[1];
    if (m.rho > 0) {
        rx = rx - m.rho * d.dtt[0];
        ry = ry - m.rho * d.dtt[1];
    }
    return {rx, ry};
}

/// Traction of the displacement form: n . (C : eps).
template <class V>
std::array<V, 2> displacement_traction(const DispDerivs<V>& d, const Material& m, double nx,
                                       double ny, double tx, double ty) {
    const auto C = constitutive_matrix(m);
    const V s11 = C[0][0] * d.dx[0] + C[0][1] * d.dy[1];
    const V s22 = C[1][0] * d.dx[0] + C[1][1] * d.dy[1];
    const V s12 = C[2][2] * (d.dy[0] + d.dx[1]);
    return traction_residual(s11, s22, s12, nx, ny, tx, ty);
}

}  // namespace pinnelast::elast
