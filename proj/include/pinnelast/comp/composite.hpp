#pragma once

#include <array>
#include <span>

#include "pinnelast/geom/distance.hpp"
#include "pinnelast/net/checkpoint.hpp"
#include "pinnelast/net/mlp.hpp"

namespace pinnelast::comp {

/// Hard-enforcement triple: solution = particular + distance (.) general,
/// channel-wise. The distance factor is either a trained network or the
/// closed-form field. After pre-training, `particular` and `distance_net`
/// are frozen; only `general` stays trainable.
struct CompositeModel {
    net::Mlp particular;
    net::Mlp general;
    bool analytic_distance = true;
    geom::AnalyticDistance dist;
    net::Mlp distance_net;
    bool particular_frozen = false;
    bool distance_frozen = false;

    int channels() const { return particular.spec.output_dim; }

    void check_wiring() const {
        if (particular.spec.output_dim != general.spec.output_dim)
            throw ad::ContractViolation("composite: channel counts differ (particular/general)");
        if (!analytic_distance && distance_net.spec.output_dim != general.spec.output_dim)
            throw ad::ContractViolation("composite: channel counts differ (distance/general)");
        if (particular.spec.input_dim != general.spec.input_dim)
            throw ad::ContractViolation("composite: input dims differ");
    }
};

/// Distance factor for one channel in scalar type S at a physical point.
template <class S>
S distance_factor(const CompositeModel& cm, int ch, std::span<const S> in) {
    if (cm.analytic_distance) {
        const auto& b = cm.dist.box;
        const S xh = (in[0] - b.x0) * (1.0 / (b.x1 - b.x0));
        const S yh = (in[1] - b.y0) * (1.0 / (b.y1 - b.y0));
        const S th = b.dynamic ? (in[2] - b.t0) * (1.0 / (b.t1 - b.t0)) : ad::from_const<S>(0.0);
        return cm.dist.template eval_channel<S>(ch, xh, yh, th);
    }
    static thread_local std::vector<S> dout;
    dout.resize(static_cast<std::size_t>(cm.distance_net.spec.output_dim));
    net::mlp_forward<S>(cm.distance_net.spec, net::DenseParams{cm.distance_net.params.flat.data()},
                        cm.distance_net.in_map, cm.distance_net.out_map, in,
                        std::span<S>(dout));
    return dout[ch];
}

/// The composed solution, channel-wise, differentiable through all three
/// factors in whatever scalar type S the caller evaluates with.
template <class S>
std::array<S, 5> synergy_eval(const CompositeModel& cm, std::span<const S> in) {
    cm.check_wiring();
    const int C = cm.channels();
    std::array<S, 5> out{};
    std::vector<S> up(C), uh(C);
    net::mlp_forward<S>(cm.particular.spec, net::DenseParams{cm.particular.params.flat.data()},
                        cm.particular.in_map, cm.particular.out_map, in, std::span<S>(up));
    net::mlp_forward<S>(cm.general.spec, net::DenseParams{cm.general.params.flat.data()},
                        cm.general.in_map, cm.general.out_map, in, std::span<S>(uh));
    for (int c = 0; c < C; ++c) {
        const S d = distance_factor<S>(cm, c, in);
        out[c] = up[c] + d * uh[c];
    }
    return out;
}

inline void save_composite(const std::string& dir, const CompositeModel& cm) {
    net::save_checkpoint(dir + "/particular.ckpt", cm.particular, net::NetRole::particular,
                         cm.particular_frozen);
    net::save_checkpoint(dir + "/general.ckpt", cm.general, net::NetRole::general, false);
    if (!cm.analytic_distance)
        net::save_checkpoint(dir + "/distance.ckpt", cm.distance_net, net::NetRole::distance,
                             cm.distance_frozen);
}

}  // namespace pinnelast::comp
