#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pinnelast::ad {

/// Primitive operations a tape node can represent.
enum class Op : std::uint8_t {
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
};

inline const char* op_name(Op op) {
    switch (op) {
        case Op::leaf: return "leaf";
        case Op::constant: return "constant";
        case Op::add: return "add";
        case Op::sub: return "sub";
        case Op::mul: return "mul";
        case Op::div: return "div";
        case Op::neg: return "neg";
        case Op::powi: return "powi";
        case Op::tanh_fn: return "tanh";
        case Op::sin_fn: return "sin";
        case Op::cos_fn: return "cos";
        case Op::exp_fn: return "exp";
    }
    return "?";
}

/// Thrown when an expression produces a non-finite intermediate value.
struct EvalError : std::runtime_error {
    explicit EvalError(Op op)
        : std::runtime_error(std::string("non-finite value produced by primitive '") +
                             op_name(op) + "'"),
          op_(op) {}
    Op op_;
};

/// Thrown when a caller breaks an API precondition.
struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

/// Reverse-mode tape over scalar nodes.
///
/// Nodes are stored in creation (topological) order as a structure of arrays.
/// Index 0 is a built-in constant 0 and index 1 a built-in constant 1; index 0
/// doubles as the adjoint sink for folded constant operands, so the reverse
/// sweep runs without branches. Persistent leaves (trainable parameters) live
/// below `leaf_top()`; everything recorded after `seal_leaves()` is transient
/// and reclaimed by `rewind()`.
///
/// Folded binary ops (one operand a literal constant) store the constant in
/// the unused d2 slot with p2 == 0; no constant node is materialised.
class Tape {
  public:
    static constexpr std::uint32_t kZero = 0;
    static constexpr std::uint32_t kOne = 1;

    /// Parents and local partials, packed so the reverse sweep streams one array.
    struct NodeRec {
        std::uint32_t p1, p2;
        double d1, d2;
    };

    Tape() { reset(); }

    void reset() {
        size_ = 0;
        leaf_top_ = 0;
        sealed_ = false;
        ensure(1024);
        push_raw(Op::constant, kZero, kZero, 0.0, 0.0, 0.0);
        push_raw(Op::constant, kZero, kZero, 1.0, 0.0, 0.0);
        adj_[0] = adj_[1] = 0.0;
    }

    /// Registers a persistent leaf. Only valid before seal_leaves().
    std::uint32_t leaf(double v) {
        if (sealed_) throw ContractViolation("leaf() after seal_leaves()");
        if (size_ == cap_) grow();
        const auto i = push_raw(Op::leaf, kZero, kZero, v, 0.0, 0.0);
        adj_[i] = 0.0;
        return i;
    }

    /// Freezes the persistent-leaf region; rewind() cannot drop below it.
    void seal_leaves() {
        leaf_top_ = size_;
        sealed_ = true;
    }

    bool sealed() const { return sealed_; }
    std::size_t leaf_top() const { return leaf_top_; }

    void set_leaf(std::uint32_t i, double v) { val_[i] = v; }

    /// Overwrites a contiguous block of leaf values starting at `base`.
    void set_leaves(std::uint32_t base, std::span<const double> vals) {
        std::memcpy(val_.data() + base, vals.data(), vals.size() * sizeof(double));
    }

    const double* leaf_values(std::uint32_t base) const { return val_.data() + base; }

    std::size_t mark() const { return size_; }

    void rewind(std::size_t m) {
        if (m < leaf_top_) throw ContractViolation("rewind below sealed leaves");
        size_ = m;
    }

    std::uint32_t push(Op op, std::uint32_t a, std::uint32_t b, double v, double da, double db) {
        if (size_ == cap_) [[unlikely]]
            grow();
        if (!std::isfinite(v)) [[unlikely]]
            raise_nonfinite(op);
        return push_raw(op, a, b, v, da, db);
    }

    /// Transient input node (recorded value with no parents).
    std::uint32_t input(double v) {
        if (size_ == cap_) [[unlikely]]
            grow();
        if (!std::isfinite(v)) [[unlikely]]
            raise_nonfinite(Op::leaf);
        return push_raw(Op::leaf, kZero, kZero, v, 0.0, 0.0);
    }

    std::uint32_t constant(double v) {
        if (size_ == cap_) [[unlikely]]
            grow();
        if (!std::isfinite(v)) [[unlikely]]
            raise_nonfinite(Op::constant);
        return push_raw(Op::constant, kZero, kZero, v, 0.0, 0.0);
    }

    double value(std::uint32_t i) const { return val_[i]; }
    double adjoint(std::uint32_t i) const { return adj_[i]; }
    Op op(std::uint32_t i) const { return op_[i]; }
    std::uint32_t parent1(std::uint32_t i) const { return rec_[i].p1; }
    std::uint32_t parent2(std::uint32_t i) const { return rec_[i].p2; }
    std::size_t size() const { return size_; }

    bool on_tape(std::uint32_t i) const { return i < size_; }

    /// Reverse sweep from `root` down to the sealed-leaf boundary.
    /// Adjoints of the transient region [leaf_top, root] are cleared first;
    /// leaf adjoints accumulate across calls.
    void backward(std::uint32_t root, double seed = 1.0) {
        const std::uint32_t stop = static_cast<std::uint32_t>(leaf_top_);
        zero_adjoints(stop, root + 1);
        adj_[root] = seed;
        const NodeRec* recs = rec_.data();
        double* adj = adj_.data();
        for (std::uint32_t i = root; i >= stop && i != UINT32_MAX; --i) {
            const double a = adj[i];
            if (a == 0.0) continue;
            const NodeRec& r = recs[i];
            adj[r.p1] += r.d1 * a;
            adj[r.p2] += r.d2 * a;
        }
        adj_[kZero] = 0.0;  // sink for folded operands
        adj_[kOne] = 0.0;
    }

    /// Seeds several roots before one combined sweep.
    void backward_multi(std::span<const std::uint32_t> roots, std::span<const double> seeds) {
        if (roots.empty()) return;
        std::uint32_t high = 0;
        for (auto r : roots) high = std::max(high, r);
        const std::uint32_t stop = static_cast<std::uint32_t>(leaf_top_);
        zero_adjoints(stop, high + 1);
        for (std::size_t k = 0; k < roots.size(); ++k) adj_[roots[k]] += seeds[k];
        const NodeRec* recs = rec_.data();
        double* adj = adj_.data();
        for (std::uint32_t i = high; i >= stop && i != UINT32_MAX; --i) {
            const double a = adj[i];
            if (a == 0.0) continue;
            const NodeRec& r = recs[i];
            adj[r.p1] += r.d1 * a;
            adj[r.p2] += r.d2 * a;
        }
        adj_[kZero] = 0.0;
        adj_[kOne] = 0.0;
    }

    void zero_adjoints(std::uint32_t lo, std::uint32_t hi) {
        if (hi > lo) std::memset(adj_.data() + lo, 0, (hi - lo) * sizeof(double));
    }

    void zero_leaf_adjoints() { zero_adjoints(0, static_cast<std::uint32_t>(leaf_top_)); }

    /// Re-applies the node's primitive to its parents' stored values.
    /// Diagnostic path only.
    double recompute(std::uint32_t i) const {
        const double a = val_[rec_[i].p1];
        const double b = val_[rec_[i].p2];
        const bool folded = rec_[i].p2 == kZero && op_[i] != Op::neg;
        const double c = rec_[i].d2;  // folded constant lives here
        switch (op_[i]) {
            case Op::leaf:
            case Op::constant: return val_[i];
            case Op::add: return folded ? a + c : a + b;
            case Op::sub: return folded ? (rec_[i].d1 > 0 ? a - c : c - a) : a - b;
            case Op::mul: return folded ? a * rec_[i].d1 : a * b;
            case Op::div: return folded ? c / a : a / b;
            case Op::neg: return -a;
            case Op::powi: return val_[i];  // exponent not retained; value is authoritative
            case Op::tanh_fn: return std::tanh(a);
            case Op::sin_fn: return std::sin(a);
            case Op::cos_fn: return std::cos(a);
            case Op::exp_fn: return std::exp(a);
        }
        return val_[i];
    }

  private:
    std::uint32_t push_raw(Op op, std::uint32_t a, std::uint32_t b, double v, double da,
                           double db) {
        const std::size_t n = size_++;
        val_[n] = v;
        rec_[n] = NodeRec{a, b, da, db};
        op_[n] = op;
        return static_cast<std::uint32_t>(n);
    }

    [[noreturn, gnu::noinline, gnu::cold]] static void raise_nonfinite(Op op) {
        throw EvalError(op);
    }

    [[gnu::noinline, gnu::cold]] void grow() {
        std::size_t c = cap_ ? cap_ * 2 : 1024;
        val_.resize(c);
        adj_.resize(c);
        rec_.resize(c);
        op_.resize(c);
        cap_ = c;
    }

    void ensure(std::size_t need) {
        while (cap_ < need) grow();
    }

    std::vector<double> val_, adj_;
    std::vector<NodeRec> rec_;
    std::vector<Op> op_;
    std::size_t size_ = 0;
    std::size_t cap_ = 0;
    std::size_t leaf_top_ = 0;
    bool sealed_ = false;
};

namespace detail {
inline thread_local Tape* g_tape = nullptr;
}

inline Tape& current_tape() {
    if (!detail::g_tape) throw ContractViolation("no active tape on this thread");
    return *detail::g_tape;
}

/// Binds a tape to the calling thread for the lifetime of the scope.
class TapeScope {
  public:
    explicit TapeScope(Tape& t) : prev_(detail::g_tape) { detail::g_tape = &t; }
    ~TapeScope() { detail::g_tape = prev_; }
    TapeScope(const TapeScope&) = delete;
    TapeScope& operator=(const TapeScope&) = delete;

  private:
    Tape* prev_;
};

/// Handle to a tape node. Carries the node value so chained arithmetic never
/// reads back through the tape.
struct Var {
    std::uint32_t idx = Tape::kZero;
    double val = 0.0;

    static Var zero() { return Var{Tape::kZero, 0.0}; }
    static Var one() { return Var{Tape::kOne, 1.0}; }

    double value() const { return val; }
};

inline Var make_input(double v) { return Var{current_tape().input(v), v}; }
inline Var make_constant(double v) {
    if (v == 0.0) return Var::zero();
    if (v == 1.0) return Var::one();
    return Var{current_tape().constant(v), v};
}

/// Rebuilds a Var handle for an existing node (e.g. a sealed parameter leaf).
inline Var var_at(const Tape& t, std::uint32_t idx) { return Var{idx, t.value(idx)}; }

// --- binary ops ---------------------------------------------------------

inline Var operator+(Var a, Var b) {
    const double v = a.val + b.val;
    return Var{current_tape().push(Op::add, a.idx, b.idx, v, 1.0, 1.0), v};
}

inline Var operator-(Var a, Var b) {
    const double v = a.val - b.val;
    return Var{current_tape().push(Op::sub, a.idx, b.idx, v, 1.0, -1.0), v};
}

inline Var operator*(Var a, Var b) {
    const double v = a.val * b.val;
    return Var{current_tape().push(Op::mul, a.idx, b.idx, v, b.val, a.val), v};
}

inline Var operator/(Var a, Var b) {
    const double v = a.val / b.val;
    return Var{current_tape().push(Op::div, a.idx, b.idx, v, 1.0 / b.val, -v / b.val), v};
}

inline Var operator-(Var a) {
    return Var{current_tape().push(Op::neg, a.idx, Tape::kZero, -a.val, -1.0, 0.0), -a.val};
}

// Constant operands fold into the node (constant kept in the d2 slot).

inline Var operator+(Var a, double c) {
    if (c == 0.0) return a;
    const double v = a.val + c;
    return Var{current_tape().push(Op::add, a.idx, Tape::kZero, v, 1.0, c), v};
}
inline Var operator+(double c, Var a) { return a + c; }

inline Var operator-(Var a, double c) {
    if (c == 0.0) return a;
    const double v = a.val - c;
    return Var{current_tape().push(Op::sub, a.idx, Tape::kZero, v, 1.0, c), v};
}

inline Var operator-(double c, Var a) {
    const double v = c - a.val;
    return Var{current_tape().push(Op::sub, a.idx, Tape::kZero, v, -1.0, c), v};
}

inline Var operator*(Var a, double c) {
    if (c == 1.0) return a;
    if (c == 0.0 || a.idx == Tape::kZero) return Var::zero();
    const double v = a.val * c;
    return Var{current_tape().push(Op::mul, a.idx, Tape::kZero, v, c, 0.0), v};
}
inline Var operator*(double c, Var a) { return a * c; }

inline Var operator/(Var a, double c) { return a * (1.0 / c); }

inline Var operator/(double c, Var a) {
    const double v = c / a.val;
    return Var{current_tape().push(Op::div, a.idx, Tape::kZero, v, -v / a.val, c), v};
}

// --- unary functions -----------------------------------------------------

inline Var tanh(Var a) {
    const double v = std::tanh(a.val);
    return Var{current_tape().push(Op::tanh_fn, a.idx, Tape::kZero, v, 1.0 - v * v, 0.0), v};
}

inline Var sin(Var a) {
    const double v = std::sin(a.val);
    return Var{current_tape().push(Op::sin_fn, a.idx, Tape::kZero, v, std::cos(a.val), 0.0), v};
}

inline Var cos(Var a) {
    const double v = std::cos(a.val);
    return Var{current_tape().push(Op::cos_fn, a.idx, Tape::kZero, v, -std::sin(a.val), 0.0), v};
}

inline Var exp(Var a) {
    const double v = std::exp(a.val);
    return Var{current_tape().push(Op::exp_fn, a.idx, Tape::kZero, v, v, 0.0), v};
}

/// Integer power. n may be negative; n == 0 yields the constant 1.
inline Var powi(Var a, int n) {
    if (n == 0) return Var::one();
    if (n == 1) return a;
    const double v = std::pow(a.val, n);
    return Var{current_tape().push(Op::powi, a.idx, Tape::kZero, v, n * std::pow(a.val, n - 1), 0.0),
               v};
}

}  // namespace pinnelast::ad
