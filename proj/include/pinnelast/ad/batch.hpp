#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "pinnelast/ad/dual.hpp"
#include "pinnelast/ad/tape.hpp"

namespace pinnelast::ad {

/// Number of collocation points evaluated side by side on a batched tape.
inline constexpr int kLanes = 8;
using Lanes = std::array<double, kLanes>;

/// Batched node operations. Local partials are recomputed from stored values
/// during the reverse sweep, so a node stores only its value lanes, parents,
/// and (for constant-folded forms) one scalar constant.
enum class BOp : std::uint8_t {
    leaf,
    constant,
    add,
    sub,
    mul,
    div,
    neg,
    powi,
    tanh_fn,
    sin_fn,
    cos_fn,
    exp_fn,
    addc,  // x + c
    csub,  // c - x
    mulc,  // x * c
    cdiv,  // c / x
};

inline const char* bop_name(BOp op) {
    switch (op) {
        case BOp::leaf: return "leaf";
        case BOp::constant: return "constant";
        case BOp::add: return "add";
        case BOp::sub: return "sub";
        case BOp::addc: return "add";
        case BOp::csub: return "sub";
        case BOp::mul: return "mul";
        case BOp::mulc: return "mul";
        case BOp::div: return "div";
        case BOp::cdiv: return "div";
        case BOp::neg: return "neg";
        case BOp::powi: return "powi";
        case BOp::tanh_fn: return "tanh";
        case BOp::sin_fn: return "sin";
        case BOp::cos_fn: return "cos";
        case BOp::exp_fn: return "exp";
    }
    return "?";
}

/// Non-finite value in one lane of a batched evaluation. Carries the lane so
/// the caller can name the offending collocation point.
struct BatchEvalError : std::runtime_error {
    BatchEvalError(BOp op, int lane)
        : std::runtime_error(std::string("non-finite value produced by primitive '") +
                             bop_name(op) + "' (lane " + std::to_string(lane) + ")"),
          lane_(lane) {}
    int lane_;
};

/// Lane-parallel reverse-mode tape. Node i's value and adjoint are 8-wide;
/// lanes never interact, so each lane reproduces the scalar tape bit for bit.
class BatchTape {
  public:
    static constexpr std::uint32_t kZero = 0;
    static constexpr std::uint32_t kOne = 1;

    BatchTape() { reset(); }

    void reset() {
        size_ = 0;
        leaf_top_ = 0;
        sealed_ = false;
        ensure(1024);
        const auto z = raw(BOp::constant, kZero, kZero, 0.0);
        val_[z].fill(0.0);
        const auto o = raw(BOp::constant, kZero, kZero, 0.0);
        val_[o].fill(1.0);
        adj_[0] = Lanes{};
        adj_[1] = Lanes{};
    }

    /// Persistent leaf broadcast across lanes (trainable parameter).
    std::uint32_t leaf(double v) {
        if (sealed_) throw ContractViolation("leaf() after seal_leaves()");
        if (size_ == cap_) grow();
        const auto i = raw(BOp::leaf, kZero, kZero, 0.0);
        val_[i].fill(v);
        adj_[i] = Lanes{};
        return i;
    }

    void seal_leaves() {
        leaf_top_ = size_;
        sealed_ = true;
    }

    std::size_t leaf_top() const { return leaf_top_; }

    /// Broadcasts fresh parameter values into the sealed leaf block.
    void set_leaves(std::uint32_t base, std::span<const double> vals) {
        for (std::size_t i = 0; i < vals.size(); ++i) val_[base + i].fill(vals[i]);
    }

    std::size_t mark() const { return size_; }
    void rewind(std::size_t m) {
        if (m < leaf_top_) throw ContractViolation("rewind below sealed leaves");
        size_ = m;
    }

    /// Transient input with per-lane values.
    std::uint32_t input(const Lanes& v) {
        if (size_ == cap_) [[unlikely]]
            grow();
        const auto i = raw(BOp::leaf, kZero, kZero, 0.0);
        val_[i] = v;
        check(i, BOp::leaf);
        return i;
    }

    std::uint32_t constant_lanes(const Lanes& v) {
        if (size_ == cap_) [[unlikely]]
            grow();
        const auto i = raw(BOp::constant, kZero, kZero, 0.0);
        val_[i] = v;
        check(i, BOp::constant);
        return i;
    }

    std::uint32_t constant(double v) {
        if (size_ == cap_) [[unlikely]]
            grow();
        const auto i = raw(BOp::constant, kZero, kZero, 0.0);
        val_[i].fill(v);
        check(i, BOp::constant);
        return i;
    }

    const Lanes& value(std::uint32_t i) const { return val_[i]; }
    const Lanes& adjoint(std::uint32_t i) const { return adj_[i]; }
    std::size_t size() const { return size_; }
    BOp op(std::uint32_t i) const { return op_[i]; }

    // --- recording primitives (called by BVar operators) ---

    std::uint32_t binary(BOp op, std::uint32_t a, std::uint32_t b) {
        if (size_ == cap_) [[unlikely]]
            grow();
        const auto i = raw(op, a, b, 0.0);
        const Lanes& A = val_[a];
        const Lanes& B = val_[b];
        Lanes& R = val_[i];
        switch (op) {
            case BOp::add:
                for (int k = 0; k < kLanes; ++k) R[k] = A[k] + B[k];
                break;
            case BOp::sub:
                for (int k = 0; k < kLanes; ++k) R[k] = A[k] - B[k];
                break;
            case BOp::mul:
                for (int k = 0; k < kLanes; ++k) R[k] = A[k] * B[k];
                break;
            case BOp::div:
                for (int k = 0; k < kLanes; ++k) R[k] = A[k] / B[k];
                break;
            default: throw ContractViolation("binary() with non-binary op");
        }
        check(i, op);
        return i;
    }

    std::uint32_t with_const(BOp op, std::uint32_t a, double c) {
        if (size_ == cap_) [[unlikely]]
            grow();
        const auto i = raw(op, a, kZero, c);
        const Lanes& A = val_[a];
        Lanes& R = val_[i];
        switch (op) {
            case BOp::addc:
                for (int k = 0; k < kLanes; ++k) R[k] = A[k] + c;
                break;
            case BOp::csub:
                for (int k = 0; k < kLanes; ++k) R[k] = c - A[k];
                break;
            case BOp::mulc:
                for (int k = 0; k < kLanes; ++k) R[k] = A[k] * c;
                break;
            case BOp::cdiv:
                for (int k = 0; k < kLanes; ++k) R[k] = c / A[k];
                break;
            case BOp::powi: {
                const int n = static_cast<int>(c);
                for (int k = 0; k < kLanes; ++k) R[k] = std::pow(A[k], n);
                break;
            }
            default: throw ContractViolation("with_const() with wrong op");
        }
        check(i, op);
        return i;
    }

    std::uint32_t unary(BOp op, std::uint32_t a) {
        if (size_ == cap_) [[unlikely]]
            grow();
        const auto i = raw(op, a, kZero, 0.0);
        const Lanes& A = val_[a];
        Lanes& R = val_[i];
        switch (op) {
            case BOp::neg:
                for (int k = 0; k < kLanes; ++k) R[k] = -A[k];
                break;
            case BOp::tanh_fn:
                for (int k = 0; k < kLanes; ++k) R[k] = std::tanh(A[k]);
                break;
            case BOp::sin_fn:
                for (int k = 0; k < kLanes; ++k) R[k] = std::sin(A[k]);
                break;
            case BOp::cos_fn:
                for (int k = 0; k < kLanes; ++k) R[k] = std::cos(A[k]);
                break;
            case BOp::exp_fn:
                for (int k = 0; k < kLanes; ++k) R[k] = std::exp(A[k]);
                break;
            default: throw ContractViolation("unary() with wrong op");
        }
        check(i, op);
        return i;
    }

    /// Reverse sweep with per-lane seeds; zero seeds make padded lanes inert.
    /// Leaf adjoint lanes accumulate across calls.
    void backward(std::uint32_t root, const Lanes& seeds) {
        const std::uint32_t stop = static_cast<std::uint32_t>(leaf_top_);
        std::memset(adj_.data() + stop, 0, (root + 1 - stop) * sizeof(Lanes));
        adj_[root] = seeds;
        for (std::uint32_t i = root; i >= stop && i != UINT32_MAX; --i) {
            const Lanes a = adj_[i];
            bool live = false;
            for (int k = 0; k < kLanes; ++k) live = live || a[k] != 0.0;
            if (!live) continue;
            const std::uint32_t q1 = p1_[i], q2 = p2_[i];
            switch (op_[i]) {
                case BOp::add: {
                    Lanes& A1 = adj_[q1];
                    Lanes& A2 = adj_[q2];
                    for (int k = 0; k < kLanes; ++k) A1[k] += a[k];
                    for (int k = 0; k < kLanes; ++k) A2[k] += a[k];
                    break;
                }
                case BOp::sub: {
                    Lanes& A1 = adj_[q1];
                    Lanes& A2 = adj_[q2];
                    for (int k = 0; k < kLanes; ++k) A1[k] += a[k];
                    for (int k = 0; k < kLanes; ++k) A2[k] -= a[k];
                    break;
                }
                case BOp::mul: {
                    Lanes& A1 = adj_[q1];
                    Lanes& A2 = adj_[q2];
                    const Lanes& V1 = val_[q1];
                    const Lanes& V2 = val_[q2];
                    for (int k = 0; k < kLanes; ++k) A1[k] += V2[k] * a[k];
                    for (int k = 0; k < kLanes; ++k) A2[k] += V1[k] * a[k];
                    break;
                }
                case BOp::div: {
                    Lanes& A1 = adj_[q1];
                    Lanes& A2 = adj_[q2];
                    const Lanes& V2 = val_[q2];
                    const Lanes& R = val_[i];
                    for (int k = 0; k < kLanes; ++k) A1[k] += a[k] / V2[k];
                    for (int k = 0; k < kLanes; ++k) A2[k] -= R[k] / V2[k] * a[k];
                    break;
                }
                case BOp::addc: {
                    Lanes& A1 = adj_[q1];
                    for (int k = 0; k < kLanes; ++k) A1[k] += a[k];
                    break;
                }
                case BOp::csub: {
                    Lanes& A1 = adj_[q1];
                    for (int k = 0; k < kLanes; ++k) A1[k] -= a[k];
                    break;
                }
                case BOp::mulc: {
                    Lanes& A1 = adj_[q1];
                    const double c = cst_[i];
                    for (int k = 0; k < kLanes; ++k) A1[k] += c * a[k];
                    break;
                }
                case BOp::cdiv: {
                    Lanes& A1 = adj_[q1];
                    const Lanes& V1 = val_[q1];
                    const Lanes& R = val_[i];
                    for (int k = 0; k < kLanes; ++k) A1[k] -= R[k] / V1[k] * a[k];
                    break;
                }
                case BOp::neg: {
                    Lanes& A1 = adj_[q1];
                    for (int k = 0; k < kLanes; ++k) A1[k] -= a[k];
                    break;
                }
                case BOp::powi: {
                    Lanes& A1 = adj_[q1];
                    const Lanes& V1 = val_[q1];
                    const int n = static_cast<int>(cst_[i]);
                    for (int k = 0; k < kLanes; ++k)
                        A1[k] += n * std::pow(V1[k], n - 1) * a[k];
                    break;
                }
                case BOp::tanh_fn: {
                    Lanes& A1 = adj_[q1];
                    const Lanes& R = val_[i];
                    for (int k = 0; k < kLanes; ++k) A1[k] += (1.0 - R[k] * R[k]) * a[k];
                    break;
                }
                case BOp::sin_fn: {
                    Lanes& A1 = adj_[q1];
                    const Lanes& V1 = val_[q1];
                    for (int k = 0; k < kLanes; ++k) A1[k] += std::cos(V1[k]) * a[k];
                    break;
                }
                case BOp::cos_fn: {
                    Lanes& A1 = adj_[q1];
                    const Lanes& V1 = val_[q1];
                    for (int k = 0; k < kLanes; ++k) A1[k] -= std::sin(V1[k]) * a[k];
                    break;
                }
                case BOp::exp_fn: {
                    Lanes& A1 = adj_[q1];
                    const Lanes& R = val_[i];
                    for (int k = 0; k < kLanes; ++k) A1[k] += R[k] * a[k];
                    break;
                }
                case BOp::leaf:
                case BOp::constant: break;
            }
        }
        adj_[kZero] = Lanes{};
        adj_[kOne] = Lanes{};
    }

    void zero_leaf_adjoints() {
        std::memset(adj_.data(), 0, leaf_top_ * sizeof(Lanes));
    }

    /// Sums a leaf's adjoint lanes in lane order.
    double leaf_grad(std::uint32_t i) const {
        double s = 0.0;
        for (int k = 0; k < kLanes; ++k) s += adj_[i][k];
        return s;
    }

  private:
    std::uint32_t raw(BOp op, std::uint32_t a, std::uint32_t b, double c) {
        const std::size_t n = size_++;
        p1_[n] = a;
        p2_[n] = b;
        cst_[n] = c;
        op_[n] = op;
        return static_cast<std::uint32_t>(n);
    }

    void check(std::uint32_t i, BOp op) {
        const Lanes& v = val_[i];
        bool ok = true;
        for (int k = 0; k < kLanes; ++k) ok = ok && std::isfinite(v[k]);
        if (!ok) [[unlikely]] {
            for (int k = 0; k < kLanes; ++k)
                if (!std::isfinite(v[k])) throw BatchEvalError(op, k);
        }
    }

    [[gnu::noinline, gnu::cold]] void grow() {
        std::size_t c = cap_ ? cap_ * 2 : 1024;
        val_.resize(c);
        adj_.resize(c);
        p1_.resize(c);
        p2_.resize(c);
        cst_.resize(c);
        op_.resize(c);
        cap_ = c;
    }

    void ensure(std::size_t need) {
        while (cap_ < need) grow();
    }

    std::vector<Lanes> val_, adj_;
    std::vector<std::uint32_t> p1_, p2_;
    std::vector<double> cst_;
    std::vector<BOp> op_;
    std::size_t size_ = 0, cap_ = 0, leaf_top_ = 0;
    bool sealed_ = false;
};

namespace detail {
inline thread_local BatchTape* g_btape = nullptr;
}

inline BatchTape& current_btape() {
    if (!detail::g_btape) throw ContractViolation("no active batch tape on this thread");
    return *detail::g_btape;
}

class BatchTapeScope {
  public:
    explicit BatchTapeScope(BatchTape& t) : prev_(detail::g_btape) { detail::g_btape = &t; }
    ~BatchTapeScope() { detail::g_btape = prev_; }
    BatchTapeScope(const BatchTapeScope&) = delete;
    BatchTapeScope& operator=(const BatchTapeScope&) = delete;

  private:
    BatchTape* prev_;
};

/// Handle to a batched tape node.
struct BVar {
    std::uint32_t idx = BatchTape::kZero;
    static BVar zero() { return BVar{BatchTape::kZero}; }
    static BVar one() { return BVar{BatchTape::kOne}; }
};

inline BVar make_binput(const Lanes& v) { return BVar{current_btape().input(v)}; }
inline BVar make_bconstant(const Lanes& v) { return BVar{current_btape().constant_lanes(v)}; }
inline BVar make_bconstant(double v) {
    if (v == 0.0) return BVar::zero();
    if (v == 1.0) return BVar::one();
    return BVar{current_btape().constant(v)};
}

inline BVar operator+(BVar a, BVar b) { return BVar{current_btape().binary(BOp::add, a.idx, b.idx)}; }
inline BVar operator-(BVar a, BVar b) { return BVar{current_btape().binary(BOp::sub, a.idx, b.idx)}; }
inline BVar operator*(BVar a, BVar b) {
    if (a.idx == BatchTape::kOne) return b;
    if (b.idx == BatchTape::kOne) return a;
    if (a.idx == BatchTape::kZero || b.idx == BatchTape::kZero) return BVar::zero();
    return BVar{current_btape().binary(BOp::mul, a.idx, b.idx)};
}
inline BVar operator/(BVar a, BVar b) { return BVar{current_btape().binary(BOp::div, a.idx, b.idx)}; }
inline BVar operator-(BVar a) { return BVar{current_btape().unary(BOp::neg, a.idx)}; }

inline BVar operator+(BVar a, double c) {
    if (c == 0.0) return a;
    return BVar{current_btape().with_const(BOp::addc, a.idx, c)};
}
inline BVar operator+(double c, BVar a) { return a + c; }
inline BVar operator-(BVar a, double c) { return a + (-c); }
inline BVar operator-(double c, BVar a) { return BVar{current_btape().with_const(BOp::csub, a.idx, c)}; }
inline BVar operator*(BVar a, double c) {
    if (c == 1.0) return a;
    if (c == 0.0 || a.idx == BatchTape::kZero) return BVar::zero();
    return BVar{current_btape().with_const(BOp::mulc, a.idx, c)};
}
inline BVar operator*(double c, BVar a) { return a * c; }
inline BVar operator/(BVar a, double c) { return a * (1.0 / c); }
inline BVar operator/(double c, BVar a) { return BVar{current_btape().with_const(BOp::cdiv, a.idx, c)}; }

inline BVar tanh(BVar a) { return BVar{current_btape().unary(BOp::tanh_fn, a.idx)}; }
inline BVar sin(BVar a) { return BVar{current_btape().unary(BOp::sin_fn, a.idx)}; }
inline BVar cos(BVar a) { return BVar{current_btape().unary(BOp::cos_fn, a.idx)}; }
inline BVar exp(BVar a) { return BVar{current_btape().unary(BOp::exp_fn, a.idx)}; }
inline BVar powi(BVar a, int n) {
    if (n == 0) return BVar::one();
    if (n == 1) return a;
    return BVar{current_btape().with_const(BOp::powi, a.idx, static_cast<double>(n))};
}

inline bool is_zero(BVar x) { return x.idx == BatchTape::kZero; }
inline double primal_value(BVar x) { return current_btape().value(x.idx)[0]; }

template <>
struct scalar_impl<BVar> {
    static BVar zero() { return BVar::zero(); }
    static BVar constant(double c) { return make_bconstant(c); }
};

}  // namespace pinnelast::ad
