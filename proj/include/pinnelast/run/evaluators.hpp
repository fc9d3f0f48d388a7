#pragma once

#include <array>
#include <span>
#include <vector>

#include "pinnelast/ad/batch.hpp"
#include "pinnelast/comp/composite.hpp"
#include "pinnelast/elast/residuals.hpp"
#include "pinnelast/net/mlp.hpp"

namespace pinnelast::run {

using elast::DispDerivs;
using elast::FieldDerivs;

/// Parameter access through batched-tape leaves.
struct BatchParams {
    std::uint32_t base;
    ad::BVar get(std::size_t i) const {
        return ad::BVar{base + static_cast<std::uint32_t>(i)};
    }
    using scalar = ad::BVar;
};

/// Coordinates of an evaluation point lifted into scalar type V.
template <class V>
struct PointIn {
    V x{}, y{}, t{};
    bool dynamic = false;
};

/// Frozen-factor jet (values and input derivatives of a pre-trained network
/// or closed-form distance) in constant scalar type CV.
template <class CV>
struct FrozenJet {
    CV v{}, dx{}, dy{}, dt{}, dtt{};
};

namespace detail_ev {
inline thread_local int g_max_deriv_order = 0;
inline void note_order(int k) {
    if (k > g_max_deriv_order) g_max_deriv_order = k;
}
}  // namespace detail_ev

/// Instrumentation: highest input-derivative order requested since the last
/// reset on this thread.
inline void reset_derivative_order() { detail_ev::g_max_deriv_order = 0; }
inline int max_derivative_order() { return detail_ev::g_max_deriv_order; }

namespace detail_ev {

template <class V, class PA>
void forward_spatial(const net::Mlp& net, const PA& pa, const PointIn<V>& p,
                     std::span<ad::Dual<V, 2>> out) {
    note_order(1);
    using S = ad::Dual<V, 2>;
    const V one = ad::from_const<V>(1.0);
    const V zero = ad::zero_of<V>();
    std::array<S, 3> in;
    in[0] = S{p.x, {one, zero}};
    in[1] = S{p.y, {zero, one}};
    int d = 2;
    if (net.spec.input_dim == 3) {
        in[2] = S{p.t, {zero, zero}};
        d = 3;
    }
    net::mlp_forward<S>(net.spec, pa, net.in_map, net.out_map,
                        std::span<const S>(in.data(), d), out);
}

template <class V, class PA>
void forward_temporal(const net::Mlp& net, const PA& pa, const PointIn<V>& p,
                      std::span<ad::Dual<ad::Dual<V, 1>, 1>> out) {
    note_order(2);
    using D1 = ad::Dual<V, 1>;
    using S = ad::Dual<D1, 1>;
    const V one = ad::from_const<V>(1.0);
    const V zero = ad::zero_of<V>();
    std::array<S, 3> in;
    in[0] = S{D1{p.x, {zero}}, {D1{zero, {zero}}}};
    in[1] = S{D1{p.y, {zero}}, {D1{zero, {zero}}}};
    in[2] = S{D1{p.t, {one}}, {D1{one, {zero}}}};
    net::mlp_forward<S>(net.spec, pa, net.in_map, net.out_map, std::span<const S>(in.data(), 3),
                        out);
}

/// Nested seeds along two (possibly equal) spatial axes; gives second
/// derivatives d2/d(ax1)d(ax2) plus the first derivative along ax1.
template <class V, class PA>
void forward_nested(const net::Mlp& net, const PA& pa, const PointIn<V>& p, int ax1, int ax2,
                    std::span<ad::Dual<ad::Dual<V, 1>, 1>> out) {
    note_order(2);
    using D1 = ad::Dual<V, 1>;
    using S = ad::Dual<D1, 1>;
    const V one = ad::from_const<V>(1.0);
    const V zero = ad::zero_of<V>();
    std::array<S, 3> in;
    const V c[3] = {p.x, p.y, p.t};
    const int d = net.spec.input_dim;
    for (int a = 0; a < d; ++a) {
        const V s1 = a == ax1 ? one : zero;
        const V s2 = a == ax2 ? one : zero;
        in[a] = S{D1{c[a], {s1}}, {D1{s2, {zero}}}};
    }
    net::mlp_forward<S>(net.spec, pa, net.in_map, net.out_map, std::span<const S>(in.data(), d),
                        out);
}

template <class V, class PA>
void forward_values(const net::Mlp& net, const PA& pa, const PointIn<V>& p, std::span<V> out) {
    std::array<V, 3> in{p.x, p.y, p.t};
    net::mlp_forward<V>(net.spec, pa, net.in_map, net.out_map,
                        std::span<const V>(in.data(), net.spec.input_dim), out);
}

template <class V, class PA>
void forward_tseed(const net::Mlp& net, const PA& pa, const PointIn<V>& p,
                   std::span<ad::Dual<V, 1>> out) {
    note_order(1);
    using S = ad::Dual<V, 1>;
    const V one = ad::from_const<V>(1.0);
    const V zero = ad::zero_of<V>();
    std::array<S, 3> in{S{p.x, {zero}}, S{p.y, {zero}}, S{p.t, {one}}};
    net::mlp_forward<S>(net.spec, pa, net.in_map, net.out_map, std::span<const S>(in.data(), 3),
                        out);
}

}  // namespace detail_ev

/// Mixed-variable fields of a single network (soft scheme).
template <class V, class PA>
FieldDerivs<V> mixed_fields(const net::Mlp& net, const PA& pa, const PointIn<V>& p) {
    FieldDerivs<V> f;
    f.dynamic = p.dynamic;
    std::array<ad::Dual<V, 2>, 5> sp;
    detail_ev::forward_spatial(net, pa, p, std::span<ad::Dual<V, 2>>(sp));
    for (int c = 0; c < 5; ++c) {
        f.val[c] = sp[c].v;
        f.dx[c] = sp[c].d[0];
        f.dy[c] = sp[c].d[1];
    }
    if (p.dynamic) {
        std::array<ad::Dual<ad::Dual<V, 1>, 1>, 5> tp;
        detail_ev::forward_temporal(net, pa, p, std::span<ad::Dual<ad::Dual<V, 1>, 1>>(tp));
        for (int c = 0; c < 2; ++c) {
            f.dt[c] = tp[c].v.d[0];
            f.dtt[c] = tp[c].d[0].d[0];
        }
    }
    return f;
}

/// Mixed-variable fields of the composite model with frozen factors supplied
/// as constant jets; the product rule falls out of the dual arithmetic.
template <class V, class CV, class PA>
FieldDerivs<V> composite_fields(const net::Mlp& general, const PA& pa, const PointIn<V>& p,
                                std::span<const FrozenJet<CV>> up,
                                std::span<const FrozenJet<CV>> dn) {
    FieldDerivs<V> f;
    f.dynamic = p.dynamic;
    std::array<ad::Dual<V, 2>, 5> sp;
    detail_ev::forward_spatial(general, pa, p, std::span<ad::Dual<V, 2>>(sp));
    for (int c = 0; c < 5; ++c) {
        const ad::Dual<CV, 2> upj{up[c].v, {up[c].dx, up[c].dy}};
        const ad::Dual<CV, 2> dj{dn[c].v, {dn[c].dx, dn[c].dy}};
        const auto composed = upj + dj * sp[c];
        f.val[c] = composed.v;
        f.dx[c] = composed.d[0];
        f.dy[c] = composed.d[1];
    }
    if (p.dynamic) {
        using DD = ad::Dual<ad::Dual<V, 1>, 1>;
        std::array<DD, 5> tp;
        detail_ev::forward_temporal(general, pa, p, std::span<DD>(tp));
        for (int c = 0; c < 2; ++c) {
            const ad::Dual<ad::Dual<CV, 1>, 1> upj{{up[c].v, {up[c].dt}},
                                                   {{up[c].dt, {up[c].dtt}}}};
            const ad::Dual<ad::Dual<CV, 1>, 1> dj{{dn[c].v, {dn[c].dt}},
                                                  {{dn[c].dt, {dn[c].dtt}}}};
            const auto composed = upj + dj * tp[c];
            f.dt[c] = composed.v.d[0];
            f.dtt[c] = composed.d[0].d[0];
        }
    }
    return f;
}

/// Stress values only (traction conditions), composite form.
template <class V, class CV, class PA>
std::array<V, 3> composite_sigma(const net::Mlp& general, const PA& pa, const PointIn<V>& p,
                                 std::span<const FrozenJet<CV>> up,
                                 std::span<const FrozenJet<CV>> dn) {
    std::array<V, 5> vals;
    detail_ev::forward_values(general, pa, p, std::span<V>(vals));
    std::array<V, 3> out;
    for (int c = 2; c < 5; ++c) out[c - 2] = up[c].v + dn[c].v * vals[c];
    return out;
}

template <class V, class PA>
std::array<V, 5> net_values(const net::Mlp& net, const PA& pa, const PointIn<V>& p) {
    std::array<V, 5> vals{};
    detail_ev::forward_values(net, pa, p,
                              std::span<V>(vals.data(),
                                           static_cast<std::size_t>(net.spec.output_dim)));
    return vals;
}

/// Values plus first time derivatives of the displacement channels.
template <class V, class PA>
void net_values_and_velocity(const net::Mlp& net, const PA& pa, const PointIn<V>& p,
                             std::array<V, 5>& vals, std::array<V, 2>& vel) {
    std::array<ad::Dual<V, 1>, 5> out;
    detail_ev::forward_tseed(net, pa, p,
                             std::span<ad::Dual<V, 1>>(out.data(),
                                                       static_cast<std::size_t>(
                                                           net.spec.output_dim)));
    for (int c = 0; c < net.spec.output_dim; ++c) vals[c] = out[c].v;
    vel[0] = out[0].d[0];
    vel[1] = out[1].d[0];
}

/// Displacement-form derivatives (second order in space, optionally time).
template <class V, class PA>
DispDerivs<V> displacement_fields(const net::Mlp& net, const PA& pa, const PointIn<V>& p) {
    using DD = ad::Dual<ad::Dual<V, 1>, 1>;
    DispDerivs<V> d;
    d.dynamic = p.dynamic;
    std::array<DD, 2> oxx, oyy, oxy;
    detail_ev::forward_nested(net, pa, p, 0, 0, std::span<DD>(oxx));
    detail_ev::forward_nested(net, pa, p, 1, 1, std::span<DD>(oyy));
    detail_ev::forward_nested(net, pa, p, 0, 1, std::span<DD>(oxy));
    for (int c = 0; c < 2; ++c) {
        d.val[c] = oxx[c].v.v;
        d.dx[c] = oxx[c].v.d[0];
        d.dy[c] = oyy[c].v.d[0];
        d.dxx[c] = oxx[c].d[0].d[0];
        d.dyy[c] = oyy[c].d[0].d[0];
        d.dxy[c] = oxy[c].d[0].d[0];
    }
    if (p.dynamic) {
        std::array<DD, 2> ott;
        detail_ev::forward_nested(net, pa, p, 2, 2, std::span<DD>(ott));
        for (int c = 0; c < 2; ++c) d.dtt[c] = ott[c].d[0].d[0];
    }
    return d;
}

// --- scalar contexts ---------------------------------------------------------

/// Plain numeric evaluation (field export, audits, oracles).
struct DoubleCtx {
    using V = double;
    static PointIn<double> point(double x, double y, double t, bool dyn) {
        return {x, y, t, dyn};
    }
};

/// Scalar-tape evaluation; requires an active TapeScope.
struct TapeCtx {
    using V = ad::Var;
    static PointIn<ad::Var> point(double x, double y, double t, bool dyn) {
        return {ad::make_input(x), ad::make_input(y),
                dyn ? ad::make_input(t) : ad::Var::zero(), dyn};
    }
};

// --- model evaluators (the Ev concept of elast/loss.hpp; `i` is the
// point's index within its set, used by cached evaluators) ---

template <class Ctx, class PA>
struct SoftEval {
    using V = typename Ctx::V;
    const net::Mlp& net;
    PA pa;
    bool dynamic;

    FieldDerivs<V> fields(std::size_t, double x, double y, double t) {
        return mixed_fields<V>(net, pa, Ctx::point(x, y, t, dynamic));
    }
    std::array<V, 3> sigma(std::size_t, double x, double y, double t) {
        const auto u = net_values<V>(net, pa, Ctx::point(x, y, t, dynamic));
        return {u[2], u[3], u[4]};
    }
    std::array<V, 5> values(std::size_t, double x, double y, double t) {
        return net_values<V>(net, pa, Ctx::point(x, y, t, dynamic));
    }
    void values_velocity(std::size_t, double x, double y, double t, std::array<V, 5>& u,
                         std::array<V, 2>& vel) {
        net_values_and_velocity<V>(net, pa, Ctx::point(x, y, t, dynamic), u, vel);
    }
};

/// Composite evaluator with frozen factors cached as constant jets
/// (the training path; also exact for audits).
template <class Ctx, class PA, class CV = double>
struct CompositeCachedEval {
    using V = typename Ctx::V;
    const net::Mlp& general;
    PA pa;
    bool dynamic;
    std::span<const FrozenJet<CV>> up;  // 5 entries per point
    std::span<const FrozenJet<CV>> dn;

    FieldDerivs<V> fields(std::size_t i, double x, double y, double t) {
        return composite_fields<V, CV>(general, pa, Ctx::point(x, y, t, dynamic),
                                       up.subspan(i * 5, 5), dn.subspan(i * 5, 5));
    }
    std::array<V, 3> sigma(std::size_t i, double x, double y, double t) {
        return composite_sigma<V, CV>(general, pa, Ctx::point(x, y, t, dynamic),
                                      up.subspan(i * 5, 5), dn.subspan(i * 5, 5));
    }
    std::array<V, 5> values(std::size_t i, double x, double y, double t) {
        std::array<V, 5> raw;
        detail_ev::forward_values(general, pa, Ctx::point(x, y, t, dynamic),
                                  std::span<V>(raw));
        std::array<V, 5> out;
        for (int c = 0; c < 5; ++c)
            out[c] = up[i * 5 + c].v + dn[i * 5 + c].v * raw[c];
        return out;
    }
    void values_velocity(std::size_t i, double x, double y, double t, std::array<V, 5>& u,
                         std::array<V, 2>& vel) {
        std::array<ad::Dual<V, 1>, 5> o;
        detail_ev::forward_tseed(general, pa, Ctx::point(x, y, t, dynamic),
                                 std::span<ad::Dual<V, 1>>(o));
        for (int c = 0; c < 5; ++c) {
            const ad::Dual<CV, 1> upj{up[i * 5 + c].v, {up[i * 5 + c].dt}};
            const ad::Dual<CV, 1> dj{dn[i * 5 + c].v, {dn[i * 5 + c].dt}};
            const auto composed = upj + dj * o[c];
            u[c] = composed.v;
            if (c < 2) vel[c] = composed.d[0];
        }
    }
};

/// Composite evaluator that differentiates through all three live factors.
template <class Ctx>
struct CompositeLiveEval {
    using V = typename Ctx::V;
    const comp::CompositeModel& cm;
    bool dynamic;

    FieldDerivs<V> fields(std::size_t, double x, double y, double t) {
        using S = ad::Dual<V, 2>;
        const auto p = Ctx::point(x, y, t, dynamic);
        const V one = ad::from_const<V>(1.0);
        const V zero = ad::zero_of<V>();
        std::array<S, 3> in{S{p.x, {one, zero}}, S{p.y, {zero, one}}, S{p.t, {zero, zero}}};
        const auto u =
            comp::synergy_eval<S>(cm, std::span<const S>(in.data(), cm.general.spec.input_dim));
        FieldDerivs<V> f;
        f.dynamic = dynamic;
        for (int c = 0; c < 5; ++c) {
            f.val[c] = u[c].v;
            f.dx[c] = u[c].d[0];
            f.dy[c] = u[c].d[1];
        }
        if (dynamic) {
            using D1 = ad::Dual<V, 1>;
            using DD = ad::Dual<D1, 1>;
            std::array<DD, 3> tin{DD{D1{p.x, {zero}}, {D1{zero, {zero}}}},
                                  DD{D1{p.y, {zero}}, {D1{zero, {zero}}}},
                                  DD{D1{p.t, {one}}, {D1{one, {zero}}}}};
            const auto ut = comp::synergy_eval<DD>(cm, std::span<const DD>(tin.data(), 3));
            for (int c = 0; c < 2; ++c) {
                f.dt[c] = ut[c].v.d[0];
                f.dtt[c] = ut[c].d[0].d[0];
            }
        }
        return f;
    }
    std::array<V, 3> sigma(std::size_t, double x, double y, double t) {
        const auto p = Ctx::point(x, y, t, dynamic);
        std::array<V, 3> in{p.x, p.y, p.t};
        const auto u = comp::synergy_eval<V>(
            cm, std::span<const V>(in.data(), cm.general.spec.input_dim));
        return {u[2], u[3], u[4]};
    }
    std::array<V, 5> values(std::size_t, double x, double y, double t) {
        const auto p = Ctx::point(x, y, t, dynamic);
        std::array<V, 3> in{p.x, p.y, p.t};
        return comp::synergy_eval<V>(cm,
                                     std::span<const V>(in.data(), cm.general.spec.input_dim));
    }
    void values_velocity(std::size_t, double x, double y, double t, std::array<V, 5>& u,
                         std::array<V, 2>& vel) {
        using S = ad::Dual<V, 1>;
        const auto p = Ctx::point(x, y, t, dynamic);
        const V one = ad::from_const<V>(1.0);
        const V zero = ad::zero_of<V>();
        std::array<S, 3> in{S{p.x, {zero}}, S{p.y, {zero}}, S{p.t, {one}}};
        const auto o = comp::synergy_eval<S>(cm, std::span<const S>(in.data(), 3));
        for (int c = 0; c < 5; ++c) u[c] = o[c].v;
        vel[0] = o[0].d[0];
        vel[1] = o[1].d[0];
    }
};

/// Displacement-only evaluator (2-channel net).
template <class Ctx, class PA>
struct PureDispEval {
    using V = typename Ctx::V;
    const net::Mlp& net;
    PA pa;
    bool dynamic;

    DispDerivs<V> disp_fields(double x, double y, double t) {
        return displacement_fields<V>(net, pa, Ctx::point(x, y, t, dynamic));
    }
};

// --- frozen-factor cache -------------------------------------------------------

/// Values and input derivatives of the frozen particular/distance factors at
/// a list of points, computed once before hard training.
struct FrozenCache {
    std::vector<FrozenJet<double>> up;  // 5 per point
    std::vector<FrozenJet<double>> dn;
};

inline FrozenCache build_frozen_cache(const comp::CompositeModel& cm,
                                      std::span<const std::array<double, 3>> pts,
                                      bool dynamic, bool need_derivs = true) {
    FrozenCache cache;
    cache.up.resize(pts.size() * 5);
    cache.dn.resize(pts.size() * 5);
    using S2 = ad::Dual<double, 2>;
    using DD = ad::Dual<ad::Dual<double, 1>, 1>;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double x = pts[i][0], y = pts[i][1], t = pts[i][2];
        const int d = cm.general.spec.input_dim;
        if (need_derivs) {
            std::array<S2, 3> in{S2{x, {1.0, 0.0}}, S2{y, {0.0, 1.0}}, S2{t, {0.0, 0.0}}};
            std::vector<S2> up(5), dn(5);
            net::mlp_forward<S2>(cm.particular.spec,
                                 net::DenseParams{cm.particular.params.flat.data()},
                                 cm.particular.in_map, cm.particular.out_map,
                                 std::span<const S2>(in.data(), d), std::span<S2>(up));
            std::array<S2, 3> inx = in;
            for (int c = 0; c < 5; ++c)
                dn[c] = comp::distance_factor<S2>(cm, c, std::span<const S2>(inx.data(), d));
            for (int c = 0; c < 5; ++c) {
                cache.up[i * 5 + c].v = up[c].v;
                cache.up[i * 5 + c].dx = up[c].d[0];
                cache.up[i * 5 + c].dy = up[c].d[1];
                cache.dn[i * 5 + c].v = dn[c].v;
                cache.dn[i * 5 + c].dx = dn[c].d[0];
                cache.dn[i * 5 + c].dy = dn[c].d[1];
            }
        } else {
            std::array<double, 3> in{x, y, t};
            std::vector<double> up(5), dn(5);
            net::mlp_forward<double>(cm.particular.spec,
                                     net::DenseParams{cm.particular.params.flat.data()},
                                     cm.particular.in_map, cm.particular.out_map,
                                     std::span<const double>(in.data(), d),
                                     std::span<double>(up));
            for (int c = 0; c < 5; ++c)
                dn[c] = comp::distance_factor<double>(cm, c,
                                                      std::span<const double>(in.data(), d));
            for (int c = 0; c < 5; ++c) {
                cache.up[i * 5 + c].v = up[c];
                cache.dn[i * 5 + c].v = dn[c];
            }
        }
        if (dynamic) {
            using D1 = ad::Dual<double, 1>;
            std::array<DD, 3> tin{DD{D1{x, {0.0}}, {D1{0.0, {0.0}}}},
                                  DD{D1{y, {0.0}}, {D1{0.0, {0.0}}}},
                                  DD{D1{t, {1.0}}, {D1{1.0, {0.0}}}}};
            std::vector<DD> up(5), dn(5);
            net::mlp_forward<DD>(cm.particular.spec,
                                 net::DenseParams{cm.particular.params.flat.data()},
                                 cm.particular.in_map, cm.particular.out_map,
                                 std::span<const DD>(tin.data(), 3), std::span<DD>(up));
            for (int c = 0; c < 5; ++c)
                dn[c] = comp::distance_factor<DD>(cm, c, std::span<const DD>(tin.data(), 3));
            for (int c = 0; c < 5; ++c) {
                cache.up[i * 5 + c].dt = up[c].v.d[0];
                cache.up[i * 5 + c].dtt = up[c].d[0].d[0];
                cache.dn[i * 5 + c].dt = dn[c].v.d[0];
                cache.dn[i * 5 + c].dtt = dn[c].d[0].d[0];
            }
        }
    }
    return cache;
}

}  // namespace pinnelast::run
