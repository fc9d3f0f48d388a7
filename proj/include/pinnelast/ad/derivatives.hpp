#pragma once

#include <span>
#include <vector>

#include "pinnelast/ad/dual.hpp"
#include "pinnelast/ad/tape.hpp"

namespace pinnelast::ad {

/// Records an expression on `tape` and returns whatever the builder produced
/// (typically the root Var). The tape is bound to the calling thread for the
/// duration of the builder.
template <class F>
auto record(Tape& tape, F&& build) {
    TapeScope scope(tape);
    return build();
}

/// d(root)/d(leaf) for every leaf, by one reverse sweep.
/// Leaves must be nodes of `tape` that were created as leaves/inputs.
inline std::vector<double> reverse_grad(Tape& tape, Var root, std::span<const Var> leaves) {
    if (!tape.on_tape(root.idx)) throw ContractViolation("root not on tape");
    for (Var l : leaves) {
        if (!tape.on_tape(l.idx) || tape.op(l.idx) != Op::leaf)
            throw ContractViolation("gradient requested for a node that is not a leaf of this tape");
    }
    tape.zero_adjoints(0, static_cast<std::uint32_t>(tape.size()));
    tape.backward(root.idx);
    std::vector<double> g(leaves.size());
    for (std::size_t i = 0; i < leaves.size(); ++i) g[i] = tape.adjoint(leaves[i].idx);
    return g;
}

/// d(loss)/d(theta) for a contiguous block of sealed parameter leaves.
inline std::vector<double> parameter_gradient(Tape& tape, Var loss, std::uint32_t leaf_base,
                                              std::size_t count) {
    if (!tape.on_tape(loss.idx)) throw ContractViolation("loss root not on tape (tape torn down?)");
    tape.zero_adjoints(0, static_cast<std::uint32_t>(tape.size()));
    tape.backward(loss.idx);
    std::vector<double> g(count);
    for (std::size_t i = 0; i < count; ++i) g[i] = tape.adjoint(leaf_base + static_cast<std::uint32_t>(i));
    return g;
}

/// First derivative of every output channel along one input axis,
/// by seeding a unit tangent on that axis.
template <class F>
std::vector<double> directional_derivative(F&& f, std::span<const double> x, int axis) {
    std::vector<Dual1> in(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        in[i] = Dual1{x[i], {i == static_cast<std::size_t>(axis) ? 1.0 : 0.0}};
    auto out = f(std::span<const Dual1>(in));
    std::vector<double> r(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) r[i] = out[i].d[0];
    return r;
}

/// Second derivative along one axis via dual-over-dual.
template <class F>
std::vector<double> second_directional_derivative(F&& f, std::span<const double> x, int axis) {
    using DD = Dual<Dual1, 1>;
    std::vector<DD> in(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const bool seed = i == static_cast<std::size_t>(axis);
        in[i].v = Dual1{x[i], {seed ? 1.0 : 0.0}};
        in[i].d[0] = Dual1{seed ? 1.0 : 0.0, {0.0}};
    }
    auto out = f(std::span<const DD>(in));
    std::vector<double> r(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) r[i] = out[i].d[0].d[0];
    return r;
}

/// Mixed second derivative d2(out)/d(ax1)d(ax2), inner seed on ax1, outer on ax2.
template <class F>
std::vector<double> mixed_directional_derivative(F&& f, std::span<const double> x, int ax1,
                                                 int ax2) {
    using DD = Dual<Dual1, 1>;
    std::vector<DD> in(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const bool s1 = i == static_cast<std::size_t>(ax1);
        const bool s2 = i == static_cast<std::size_t>(ax2);
        in[i].v = Dual1{x[i], {s1 ? 1.0 : 0.0}};
        in[i].d[0] = Dual1{s2 ? 1.0 : 0.0, {0.0}};
    }
    auto out = f(std::span<const DD>(in));
    std::vector<double> r(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) r[i] = out[i].d[0].d[0];
    return r;
}

}  // namespace pinnelast::ad
