#pragma once

#include <span>
#include <stdexcept>

#include "pinnelast/elast/residuals.hpp"
#include "pinnelast/geom/sampling.hpp"

namespace pinnelast::elast {

/// Relative weights of the soft-enforcement loss terms.
struct LossWeights {
    double lambda_bc = 1.0;
    double lambda_ic = 1.0;
    double extra_traction = 1.0;  // weight of equation-side traction surfaces

    void validate() const {
        if (lambda_bc < 0 || lambda_ic < 0 || extra_traction < 0)
            throw MaterialError("loss weights must be nonnegative");
    }
};

/// J_p = J_g + lambda1 J_bc + lambda2 J_ic.
inline double loss_total_soft(double jg, double jbc, double jic, const LossWeights& w) {
    w.validate();
    return jg + w.lambda_bc * jbc + w.lambda_ic * jic;
}

// The Ev (model evaluator) concept used below:
//   using V;                                   // accumulation scalar
//   FieldDerivs<V> fields(x, y, t);            // mixed values + derivatives
//   std::array<V,3> sigma(x, y, t);            // stress values [s11,s22,s12]
//   std::array<V,5> values(x, y, t);           // all channel values
//   void values_velocity(x, y, t, std::array<V,5>&, std::array<V,2>&);

/// Equation loss: mean squared momentum residual plus mean squared
/// constitutive residual over the interior set, plus (when present) the mean
/// squared traction residual of equation-side surfaces such as a hole.
template <class Ev>
auto loss_equation(Ev& ev, std::span<const std::array<double, 3>> interior, const Material& m,
                   const BodyForce& bf, std::span<const geom::BcPoint> extra,
                   double extra_weight = 1.0) -> typename Ev::V {
    using V = typename Ev::V;
    if (interior.empty()) throw geom::ConfigError("loss_equation: empty interior set");
    V acc_m = ad::zero_of<V>();
    V acc_c = ad::zero_of<V>();
    for (std::size_t i = 0; i < interior.size(); ++i) {
        const auto& p = interior[i];
        const auto f = ev.fields(i, p[0], p[1], p[2]);
        const auto rm = momentum_residual(f, m, bf, p[0], p[1], p[2]);
        const auto rc = constitutive_residual(f, m);
        acc_m = acc_m + rm[0] * rm[0] + rm[1] * rm[1];
        acc_c = acc_c + rc[0] * rc[0] + rc[1] * rc[1] + rc[2] * rc[2];
    }
    const double inv = 1.0 / static_cast<double>(interior.size());
    V total = acc_m * inv + acc_c * inv;
    if (!extra.empty()) {
        V acc_e = ad::zero_of<V>();
        for (std::size_t i = 0; i < extra.size(); ++i) {
            const auto& b = extra[i];
            const auto s = ev.sigma(interior.size() + i, b.x, b.y, b.t);
            const auto r = traction_residual(s[0], s[1], s[2], b.nx, b.ny, b.trac[0], b.trac[1]);
            if (b.trac_mask & 1u) acc_e = acc_e + r[0] * r[0];
            if (b.trac_mask & 2u) acc_e = acc_e + r[1] * r[1];
        }
        total = total + acc_e * (extra_weight / static_cast<double>(extra.size()));
    }
    return total;
}

/// Boundary loss: Dirichlet displacement mismatch plus Neumann traction
/// mismatch, masked per component, means taken over each subset.
template <class Ev>
auto loss_boundary(Ev& ev, std::span<const geom::BcPoint> bc) -> typename Ev::V {
    using V = typename Ev::V;
    V acc_d = ad::zero_of<V>();
    V acc_n = ad::zero_of<V>();
    std::size_t nd = 0, nn = 0;
    for (std::size_t i = 0; i < bc.size(); ++i) {
        const auto& b = bc[i];
        if (b.dir_mask) {
            const auto u = ev.values(i, b.x, b.y, b.t);
            if (b.dir_mask & 1u) {
                const V r = u[geom::ch_u] - b.dir[0];
                acc_d = acc_d + r * r;
            }
            if (b.dir_mask & 2u) {
                const V r = u[geom::ch_v] - b.dir[1];
                acc_d = acc_d + r * r;
            }
            ++nd;
        }
        if (b.trac_mask) {
            const auto s = ev.sigma(i, b.x, b.y, b.t);
            const auto r = traction_residual(s[0], s[1], s[2], b.nx, b.ny, b.trac[0], b.trac[1]);
            if (b.trac_mask & 1u) acc_n = acc_n + r[0] * r[0];
            if (b.trac_mask & 2u) acc_n = acc_n + r[1] * r[1];
            ++nn;
        }
    }
    V total = ad::zero_of<V>();
    if (nd) total = total + acc_d * (1.0 / static_cast<double>(nd));
    if (nn) total = total + acc_n * (1.0 / static_cast<double>(nn));
    return total;
}

/// Initial loss: displacement and velocity mismatch at t = 0.
template <class Ev>
auto loss_initial(Ev& ev, std::span<const geom::IcPoint> ic) -> typename Ev::V {
    using V = typename Ev::V;
    if (ic.empty()) throw geom::ConfigError("loss_initial: empty initial set");
    V acc = ad::zero_of<V>();
    for (std::size_t i = 0; i < ic.size(); ++i) {
        const auto& p = ic[i];
        std::array<V, 5> u;
        std::array<V, 2> vel;
        ev.values_velocity(i, p.x, p.y, 0.0, u, vel);
        const V ru = u[geom::ch_u] - p.u0[0];
        const V rv = u[geom::ch_v] - p.u0[1];
        const V rut = vel[0] - p.v0[0];
        const V rvt = vel[1] - p.v0[1];
        acc = acc + ru * ru + rv * rv + rut * rut + rvt * rvt;
    }
    return acc * (1.0 / static_cast<double>(ic.size()));
}

// Pure-displacement evaluator concept:
//   using V;
//   DispDerivs<V> disp_fields(x, y, t);

/// Equation loss of the displacement-only formulation.
template <class Ev>
auto loss_pure_displacement_equation(Ev& ev, std::span<const std::array<double, 3>> interior,
                                     const Material& m, const BodyForce& bf) -> typename Ev::V {
    using V = typename Ev::V;
    if (interior.empty()) throw geom::ConfigError("pure-displacement loss: empty interior");
    V acc = ad::zero_of<V>();
    for (const auto& p : interior) {
        const auto d = ev.disp_fields(p[0], p[1], p[2]);
        const auto r = displacement_momentum_residual(d, m, bf, p[0], p[1], p[2]);
        acc = acc + r[0] * r[0] + r[1] * r[1];
    }
    return acc * (1.0 / static_cast<double>(interior.size()));
}

/// Boundary loss of the displacement-only formulation (Neumann through
/// n.(C:eps)).
template <class Ev>
auto loss_pure_displacement_boundary(Ev& ev, std::span<const geom::BcPoint> bc,
                                     const Material& m) -> typename Ev::V {
    using V = typename Ev::V;
    V acc_d = ad::zero_of<V>();
    V acc_n = ad::zero_of<V>();
    std::size_t nd = 0, nn = 0;
    for (const auto& b : bc) {
        const auto d = ev.disp_fields(b.x, b.y, b.t);
        if (b.dir_mask) {
            if (b.dir_mask & 1u) {
                const V r = d.val[0] - b.dir[0];
                acc_d = acc_d + r * r;
            }
            if (b.dir_mask & 2u) {
                const V r = d.val[1] - b.dir[1];
                acc_d = acc_d + r * r;
            }
            ++nd;
        }
        if (b.trac_mask) {
            const auto r = displacement_traction(d, m, b.nx, b.ny, b.trac[0], b.trac[1]);
            if (b.trac_mask & 1u) acc_n = acc_n + r[0] * r[0];
            if (b.trac_mask & 2u) acc_n = acc_n + r[1] * r[1];
            ++nn;
        }
    }
    V total = ad::zero_of<V>();
    if (nd) total = total + acc_d * (1.0 / static_cast<double>(nd));
    if (nn) total = total + acc_n * (1.0 / static_cast<double>(nn));
    return total;
}

}  // namespace pinnelast::elast
