#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "pinnelast/ad/dual.hpp"
#include "pinnelast/ad/tape.hpp"
#include "pinnelast/rng.hpp"

namespace pinnelast::net {

/// Architecture of a fully-connected tanh network: `hidden_layers` hidden
/// layers of `width` neurons, linear output head.
struct LayerSpec {
    int input_dim = 2;
    int output_dim = 5;
    int hidden_layers = 2;
    int width = 20;

    void validate() const {
        if (input_dim < 1 || output_dim < 1 || hidden_layers < 1 || width < 1)
            throw std::invalid_argument("LayerSpec: all dimensions must be >= 1");
    }

    int matrix_count() const { return hidden_layers + 1; }

    int layer_in(int l) const { return l == 0 ? input_dim : width; }
    int layer_out(int l) const { return l == hidden_layers ? output_dim : width; }

    /// Flat offset of layer l's block (row-major weights, then biases).
    std::size_t layer_offset(int l) const {
        std::size_t off = 0;
        for (int k = 0; k < l; ++k)
            off += static_cast<std::size_t>(layer_out(k)) * layer_in(k) + layer_out(k);
        return off;
    }

    std::size_t param_count() const { return layer_offset(matrix_count()); }

    bool operator==(const LayerSpec&) const = default;
};

/// Per-axis affine map applied to raw coordinates before the first layer.
struct InputAffine {
    std::array<double, 3> scale{1.0, 1.0, 1.0};
    std::array<double, 3> shift{0.0, 0.0, 0.0};

    /// Maps [lo, hi] per axis onto [-1, 1].
    static InputAffine to_unit_box(std::span<const double> lo, std::span<const double> hi) {
        InputAffine m;
        for (std::size_t a = 0; a < lo.size(); ++a) {
            const double span = hi[a] - lo[a];
            m.scale[a] = 2.0 / span;
            m.shift[a] = -(hi[a] + lo[a]) / span;
        }
        return m;
    }

    bool operator==(const InputAffine&) const = default;
};

/// Per-channel affine applied to the raw network output.
struct OutputScaling {
    std::array<double, 5> scale{1.0, 1.0, 1.0, 1.0, 1.0};
    std::array<double, 5> shift{0.0, 0.0, 0.0, 0.0, 0.0};

    bool operator==(const OutputScaling&) const = default;
};

/// Weights and biases in one flat vector (layer-major, row-major weights
/// before biases within each layer). The flat view is what optimizers see.
struct MlpParams {
    LayerSpec spec;
    std::vector<double> flat;

    static MlpParams zeros(const LayerSpec& s) {
        s.validate();
        return MlpParams{s, std::vector<double>(s.param_count(), 0.0)};
    }

    std::vector<double> to_vector() const { return flat; }

    void from_vector(std::span<const double> v) {
        if (v.size() != flat.size())
            throw std::invalid_argument("parameter vector length mismatch");
        flat.assign(v.begin(), v.end());
    }

    double& w(int l, int row, int col) {
        return flat[spec.layer_offset(l) + static_cast<std::size_t>(row) * spec.layer_in(l) + col];
    }
    double& b(int l, int row) {
        return flat[spec.layer_offset(l) +
                    static_cast<std::size_t>(spec.layer_out(l)) * spec.layer_in(l) + row];
    }
    double w(int l, int row, int col) const {
        return flat[spec.layer_offset(l) + static_cast<std::size_t>(row) * spec.layer_in(l) + col];
    }
    double b(int l, int row) const {
        return flat[spec.layer_offset(l) +
                    static_cast<std::size_t>(spec.layer_out(l)) * spec.layer_in(l) + row];
    }
};

/// Glorot-uniform weights, zero biases. Same seed, same bits.
inline MlpParams xavier_init(const LayerSpec& spec, std::uint64_t seed) {
    spec.validate();
    MlpParams p = MlpParams::zeros(spec);
    Rng rng(seed);
    for (int l = 0; l < spec.matrix_count(); ++l) {
        const int fan_in = spec.layer_in(l), fan_out = spec.layer_out(l);
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c) p.w(l, r, c) = rng.uniform(-limit, limit);
        // biases stay zero
    }
    return p;
}

/// Parameter access through plain doubles (frozen / evaluation path).
struct DenseParams {
    const double* p;
    double get(std::size_t i) const { return p[i]; }
    using scalar = double;
};

/// Parameter access through sealed tape leaves (training path).
struct TapeParams {
    const ad::Tape* tape;
    std::uint32_t base;
    ad::Var get(std::size_t i) const {
        return ad::var_at(*tape, base + static_cast<std::uint32_t>(i));
    }
    using scalar = ad::Var;
};

/// Registers every parameter as a tape leaf; returns the base index.
inline std::uint32_t bind_params(ad::Tape& tape, std::span<const double> flat) {
    const std::uint32_t base = static_cast<std::uint32_t>(tape.mark());
    for (double v : flat) tape.leaf(v);
    return base;
}

/// One network: architecture, coordinate map, output scaling, parameters.
struct Mlp {
    LayerSpec spec;
    InputAffine in_map;
    OutputScaling out_map;
    MlpParams params;

    static Mlp make(const LayerSpec& s, std::uint64_t seed) {
        return Mlp{s, {}, {}, xavier_init(s, seed)};
    }
};

/// Layer recursion z_i = tanh(b_i + W_i z_{i-1}), identity head, evaluated in
/// scalar type S with parameters supplied by PA. The operation order is fixed
/// (bias first, then ascending columns), so every instantiation reproduces the
/// plain-double evaluation bit for bit.
template <class S, class PA>
void mlp_forward(const LayerSpec& spec, const PA& pa, const InputAffine& in_map,
                 const OutputScaling& out_map, std::span<const S> x, std::span<S> out) {
    static thread_local std::vector<S> buf_a, buf_b;
    const std::size_t buf_len =
        static_cast<std::size_t>(std::max({spec.width, spec.input_dim, spec.output_dim}));
    buf_a.resize(buf_len);
    buf_b.resize(buf_len);

    for (int a = 0; a < spec.input_dim; ++a)
        buf_a[a] = x[a] * in_map.scale[a] + in_map.shift[a];

    std::span<S> cur(buf_a.data(), static_cast<std::size_t>(spec.input_dim));
    std::span<S> nxt(buf_b.data(), buf_b.size());

    std::size_t off = 0;
    for (int l = 0; l < spec.matrix_count(); ++l) {
        const int nin = spec.layer_in(l), nout = spec.layer_out(l);
        const bool last = l == spec.hidden_layers;
        const std::size_t woff = off, boff = off + static_cast<std::size_t>(nout) * nin;
        for (int r = 0; r < nout; ++r) {
            S acc = ad::lift_param<S>(pa.get(boff + r));
            const std::size_t row = woff + static_cast<std::size_t>(r) * nin;
            for (int c = 0; c < nin; ++c)
                acc = acc + ad::lift_param<S>(pa.get(row + c)) * cur[c];
            if (last) {
                const int ch = r;
                nxt[r] = acc * out_map.scale[ch] + out_map.shift[ch];
            } else {
                nxt[r] = tanh(acc);
            }
        }
        off = boff + nout;
        std::swap(buf_a, buf_b);
        cur = std::span<S>(buf_a.data(), static_cast<std::size_t>(nout));
        nxt = std::span<S>(buf_b.data(), buf_b.size());
    }
    for (int r = 0; r < spec.output_dim; ++r) out[r] = cur[r];
}

/// Plain evaluation at a point (no derivatives).
inline std::vector<double> eval_plain(const Mlp& net, std::span<const double> x) {
    if (static_cast<int>(x.size()) != net.spec.input_dim)
        throw ad::ContractViolation("input dimension mismatch");
    std::vector<double> out(static_cast<std::size_t>(net.spec.output_dim));
    mlp_forward<double>(net.spec, DenseParams{net.params.flat.data()}, net.in_map, net.out_map,
                        x, std::span<double>(out));
    return out;
}

template <class S>
std::vector<S> eval_as(const Mlp& net, std::span<const S> x) {
    if (static_cast<int>(x.size()) != net.spec.input_dim)
        throw ad::ContractViolation("input dimension mismatch");
    std::vector<S> out(static_cast<std::size_t>(net.spec.output_dim));
    mlp_forward<S>(net.spec, DenseParams{net.params.flat.data()}, net.in_map, net.out_map, x,
                   std::span<S>(out));
    return out;
}

}  // namespace pinnelast::net
