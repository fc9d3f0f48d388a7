#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "pinnelast/ad/derivatives.hpp"
#include "pinnelast/net/mlp.hpp"
#include "pinnelast/rng.hpp"

using namespace pinnelast;
using ad::Dual;
using ad::Dual1;
using ad::Tape;
using ad::Var;

// ---------------------------------------------------------------------------
// Independent oracles. These are written against the math, not the library.
// ---------------------------------------------------------------------------

// Tiny expression tree with its own evaluator, used to cross-check recorded
// values. Ops: '+','-','*','/','t'(tanh),'s'(sin),'e'(exp); 'x' leaf; 'c' const.
struct ENode {
    char op;
    int a = -1, b = -1;
    double c = 0.0;
};

static double eval_tree(const std::vector<ENode>& nodes, int i,
                        const std::vector<double>& leaves) {
    const ENode& n = nodes[i];
    switch (n.op) {
        case 'x': return leaves[n.a];
        case 'c': return n.c;
        case '+': return eval_tree(nodes, n.a, leaves) + eval_tree(nodes, n.b, leaves);
        case '-': return eval_tree(nodes, n.a, leaves) - eval_tree(nodes, n.b, leaves);
        case '*': return eval_tree(nodes, n.a, leaves) * eval_tree(nodes, n.b, leaves);
        case '/': return eval_tree(nodes, n.a, leaves) / eval_tree(nodes, n.b, leaves);
        case 't': return std::tanh(eval_tree(nodes, n.a, leaves));
        case 's': return std::sin(eval_tree(nodes, n.a, leaves));
        case 'e': return std::exp(eval_tree(nodes, n.a, leaves));
    }
    return 0.0;
}

static Var record_tree(const std::vector<ENode>& nodes, int i, const std::vector<Var>& leaves) {
    const ENode& n = nodes[i];
    switch (n.op) {
        case 'x': return leaves[n.a];
        case 'c': return ad::make_constant(n.c);
        case '+': return record_tree(nodes, n.a, leaves) + record_tree(nodes, n.b, leaves);
        case '-': return record_tree(nodes, n.a, leaves) - record_tree(nodes, n.b, leaves);
        case '*': return record_tree(nodes, n.a, leaves) * record_tree(nodes, n.b, leaves);
        case '/': return record_tree(nodes, n.a, leaves) / record_tree(nodes, n.b, leaves);
        case 't': return tanh(record_tree(nodes, n.a, leaves));
        case 's': return sin(record_tree(nodes, n.a, leaves));
        case 'e': return exp(record_tree(nodes, n.a, leaves));
    }
    return Var::zero();
}

// Central finite differences.
template <class F>
static double fd_first(F&& f, std::vector<double> x, std::size_t i, double h) {
    x[i] += h;
    const double fp = f(x);
    x[i] -= 2 * h;
    const double fm = f(x);
    return (fp - fm) / (2 * h);
}

template <class F>
static double fd_second(F&& f, std::vector<double> x, std::size_t i, double h) {
    const double f0 = f(x);
    x[i] += h;
    const double fp = f(x);
    x[i] -= 2 * h;
    const double fm = f(x);
    return (fp - 2 * f0 + fm) / (h * h);
}

static double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1.0, std::abs(want));
}

// ---------------------------------------------------------------------------
// record
// ---------------------------------------------------------------------------

TEST(Record, TanhAtZero) {
    Tape tape;
    tape.seal_leaves();
    auto root = ad::record(tape, [&] { return tanh(ad::make_input(0.0)); });
    EXPECT_EQ(tape.value(root.idx), 0.0);
}

TEST(Record, SmallExpression) {
    Tape tape;
    tape.seal_leaves();
    auto root = ad::record(tape, [&] {
        Var x = ad::make_input(1.0), y = ad::make_input(2.0);
        return x * y + sin(x);
    });
    EXPECT_DOUBLE_EQ(tape.value(root.idx), 2.0 + std::sin(1.0));
}

TEST(Record, MatchesIndependentEvaluatorBitForBit) {
    Rng rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        // Three random ops stacked over two leaves.
        std::vector<ENode> nodes;
        nodes.push_back({'x', 0});
        nodes.push_back({'x', 1});
        const char bin_ops[] = {'+', '-', '*', 't', 's', 'e', '*', '+'};
        for (int k = 0; k < 3; ++k) {
            char op = bin_ops[rng.index(8)];
            int a = static_cast<int>(rng.index(nodes.size()));
            int b = static_cast<int>(rng.index(nodes.size()));
            nodes.push_back({op, a, b});
        }
        std::vector<double> leaves{rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const double expected = eval_tree(nodes, static_cast<int>(nodes.size()) - 1, leaves);

        Tape tape;
        tape.seal_leaves();
        ad::TapeScope scope(tape);
        std::vector<Var> lv{ad::make_input(leaves[0]), ad::make_input(leaves[1])};
        Var root = record_tree(nodes, static_cast<int>(nodes.size()) - 1, lv);
        EXPECT_EQ(tape.value(root.idx), expected);  // same op order, same bits
    }
}

TEST(Record, NonFiniteIntermediateNamesPrimitive) {
    Tape tape;
    tape.seal_leaves();
    ad::TapeScope scope(tape);
    Var x = ad::make_input(1e6);
    try {
        Var e = exp(x);
        (void)e;
        FAIL() << "expected EvalError";
    } catch (const ad::EvalError& err) {
        EXPECT_NE(std::string(err.what()).find("exp"), std::string::npos);
    }
}

TEST(Record, NodeValuesRecomputable) {
    Tape tape;
    tape.seal_leaves();
    ad::TapeScope scope(tape);
    Var x = ad::make_input(0.7), y = ad::make_input(-1.3);
    Var root = tanh(x * y + 2.5) / (x + 4.0) - sin(y) * 0.5;
    (void)root;
    for (std::uint32_t i = 0; i < tape.size(); ++i)
        EXPECT_DOUBLE_EQ(tape.recompute(i), tape.value(i)) << "node " << i;
}

// ---------------------------------------------------------------------------
// reverse_grad
// ---------------------------------------------------------------------------

TEST(ReverseGrad, TanhPrimeAtZero) {
    Tape tape;
    tape.seal_leaves();
    ad::TapeScope scope(tape);
    Var x = ad::make_input(0.0);
    Var root = tanh(x);
    auto g = ad::reverse_grad(tape, root, std::array{x});
    EXPECT_EQ(g[0], 1.0);
}

TEST(ReverseGrad, Square) {
    Tape tape;
    tape.seal_leaves();
    ad::TapeScope scope(tape);
    Var x = ad::make_input(3.0);
    Var root = x * x;
    auto g = ad::reverse_grad(tape, root, std::array{x});
    EXPECT_EQ(g[0], 6.0);
}

TEST(ReverseGrad, LeafNotOnTapeIsContractViolation) {
    Tape tape;
    tape.seal_leaves();
    ad::TapeScope scope(tape);
    Var x = ad::make_input(1.0);
    Var root = x * x;
    Var bogus{static_cast<std::uint32_t>(tape.size()) + 7};
    EXPECT_THROW(ad::reverse_grad(tape, root, std::array{bogus}), ad::ContractViolation);
    Var non_leaf = root;  // on tape, but not a leaf
    EXPECT_THROW(ad::reverse_grad(tape, root, std::array{non_leaf}), ad::ContractViolation);
}

// Small MLP (2 inputs, two hidden layers of width 2, scalar output), input
// gradient against central differences.
TEST(ReverseGrad, MlpInputGradientMatchesFiniteDifferences) {
    net::LayerSpec spec{2, 1, 2, 2};
    for (std::uint64_t seed : {7ULL, 8ULL, 9ULL}) {
        net::Mlp mlp = net::Mlp::make(spec, seed);
        std::vector<double> x0{0.3, -0.6};

        auto f = [&](const std::vector<double>& x) { return net::eval_plain(mlp, x)[0]; };

        Tape tape;
        tape.seal_leaves();
        ad::TapeScope scope(tape);
        std::vector<Var> in{ad::make_input(x0[0]), ad::make_input(x0[1])};
        std::vector<Var> out(1);
        net::mlp_forward<Var>(spec, net::DenseParams{mlp.params.flat.data()}, mlp.in_map,
                              mlp.out_map, std::span<const Var>(in), std::span<Var>(out));
        auto g = ad::reverse_grad(tape, out[0], in);

        for (std::size_t i = 0; i < 2; ++i) {
            const double fd = fd_first(f, x0, i, 1e-5);
            EXPECT_LT(rel_err(g[i], fd), 1e-6) << "seed " << seed << " axis " << i;
        }
    }
}

// ---------------------------------------------------------------------------
// directional and second directional derivatives
// ---------------------------------------------------------------------------

TEST(Directional, LinearMap) {
    auto f = [](std::span<const Dual1> in) {
        std::vector<Dual1> out(1);
        out[0] = in[0] * 3.0 + in[1] * 2.0;
        return out;
    };
    std::vector<double> x{0.4, 1.7};
    auto d = ad::directional_derivative(f, x, 1);
    EXPECT_EQ(d[0], 2.0);
}

TEST(Directional, ConstantIsZero) {
    auto f = [](std::span<const Dual1>) {
        std::vector<Dual1> out(1);
        out[0] = ad::from_const<Dual1>(5.5);
        return out;
    };
    std::vector<double> x{0.0, 0.0};
    for (int axis : {0, 1}) EXPECT_EQ(ad::directional_derivative(f, x, axis)[0], 0.0);
}

TEST(Directional, MlpAllAxesMatchFiniteDifferences) {
    net::LayerSpec spec{3, 5, 2, 16};
    net::Mlp mlp = net::Mlp::make(spec, 11);
    std::vector<double> x0{0.25, -0.4, 0.9};
    for (int axis = 0; axis < 3; ++axis) {
        auto dual_f = [&](std::span<const Dual1> in) { return net::eval_as<Dual1>(mlp, in); };
        auto d = ad::directional_derivative(dual_f, x0, axis);
        for (int ch = 0; ch < 5; ++ch) {
            auto f = [&](const std::vector<double>& x) { return net::eval_plain(mlp, x)[ch]; };
            const double fd = fd_first(f, x0, axis, 1e-5);
            EXPECT_LT(rel_err(d[ch], fd), 1e-6) << "axis " << axis << " ch " << ch;
        }
    }
}

TEST(SecondDirectional, Quadratic) {
    auto f = [](std::span<const Dual<Dual1, 1>> in) {
        std::vector<Dual<Dual1, 1>> out(1);
        out[0] = in[2] * in[2];
        return out;
    };
    std::vector<double> x{0.0, 0.0, 1.3};
    EXPECT_DOUBLE_EQ(ad::second_directional_derivative(f, x, 2)[0], 2.0);
}

TEST(SecondDirectional, TanhAtZero) {
    auto f = [](std::span<const Dual<Dual1, 1>> in) {
        std::vector<Dual<Dual1, 1>> out(1);
        out[0] = tanh(in[0]);
        return out;
    };
    std::vector<double> x{0.0};
    EXPECT_EQ(ad::second_directional_derivative(f, x, 0)[0], 0.0);
}

TEST(SecondDirectional, MlpMatchesFiniteDifferences) {
    net::LayerSpec spec{3, 5, 2, 12};
    net::Mlp mlp = net::Mlp::make(spec, 23);
    std::vector<double> x0{0.15, 0.35, -0.5};
    for (int axis = 0; axis < 3; ++axis) {
        auto dual_f = [&](std::span<const Dual<Dual1, 1>> in) {
            return net::eval_as<Dual<Dual1, 1>>(mlp, in);
        };
        auto d = ad::second_directional_derivative(dual_f, x0, axis);
        for (int ch = 0; ch < 5; ++ch) {
            auto f = [&](const std::vector<double>& x) { return net::eval_plain(mlp, x)[ch]; };
            const double fd = fd_second(f, x0, axis, 1e-4);
            EXPECT_LT(rel_err(d[ch], fd), 1e-4) << "axis " << axis << " ch " << ch;
        }
    }
}

// ---------------------------------------------------------------------------
// parameter_gradient
// ---------------------------------------------------------------------------

TEST(ParameterGradient, ZeroFinalLayerGivesZeroBiasGradient) {
    net::LayerSpec spec{2, 3, 2, 4};
    net::Mlp mlp = net::Mlp::make(spec, 3);
    // zero the output layer
    const int lout = spec.hidden_layers;
    for (int r = 0; r < spec.layer_out(lout); ++r) {
        for (int c = 0; c < spec.layer_in(lout); ++c) mlp.params.w(lout, r, c) = 0.0;
        mlp.params.b(lout, r) = 0.0;
    }

    Tape tape;
    const auto base = net::bind_params(tape, mlp.params.flat);
    tape.seal_leaves();
    ad::TapeScope scope(tape);

    std::vector<Var> in{ad::make_input(0.2), ad::make_input(0.4)};
    std::vector<Var> out(3);
    net::mlp_forward<Var>(spec, net::TapeParams{&tape, base}, mlp.in_map, mlp.out_map,
                          std::span<const Var>(in), std::span<Var>(out));
    Var loss = out[0] * out[0] + out[1] * out[1] + out[2] * out[2];
    auto g = ad::parameter_gradient(tape, loss, base, mlp.params.flat.size());

    const std::size_t boff = spec.layer_offset(lout) +
                             static_cast<std::size_t>(spec.layer_out(lout)) * spec.layer_in(lout);
    for (int r = 0; r < spec.layer_out(lout); ++r) EXPECT_EQ(g[boff + r], 0.0);
}

TEST(ParameterGradient, VelocityLossClosedForm) {
    // out = theta * t; loss = (d out/d t)^2 = theta^2; dloss/dtheta = 2 theta.
    const double theta0 = 0.8;
    Tape tape;
    const auto base = static_cast<std::uint32_t>(tape.mark());
    tape.leaf(theta0);
    tape.seal_leaves();
    ad::TapeScope scope(tape);

    using S = Dual<Var, 1>;
    S t{ad::make_input(1.7), {Var::one()}};
    S out = ad::lift_param<S>(ad::var_at(tape, base)) * t;
    Var vel = out.d[0];
    Var loss = vel * vel;
    auto g = ad::parameter_gradient(tape, loss, base, 1);
    EXPECT_DOUBLE_EQ(g[0], 2 * theta0);
}

TEST(ParameterGradient, TornDownTapeIsContractViolation) {
    Tape tape;
    const auto base = static_cast<std::uint32_t>(tape.mark());
    tape.leaf(1.0);
    tape.seal_leaves();
    ad::TapeScope scope(tape);
    const auto m = tape.mark();
    Var x = ad::make_input(2.0);
    Var loss = x * ad::var_at(tape, base);
    tape.rewind(m);  // tear down before asking for the gradient
    EXPECT_THROW(ad::parameter_gradient(tape, loss, base, 1), ad::ContractViolation);
}

// Loss with nested input-derivatives inside a parameter gradient (the deepest
// nesting the training path needs), checked against finite differences over
// all parameters.
TEST(ParameterGradient, NestedDerivativeLossMatchesFiniteDifferences) {
    net::LayerSpec spec{3, 2, 2, 5};
    net::Mlp mlp = net::Mlp::make(spec, 31);
    std::vector<std::array<double, 3>> pts;
    Rng rng(5);
    for (int i = 0; i < 10; ++i)
        pts.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 1)});

    auto loss_at = [&](const std::vector<double>& theta) {
        net::Mlp m2 = mlp;
        m2.params.flat = theta;
        double acc = 0.0;
        for (const auto& p : pts) {
            using DD = Dual<Dual1, 1>;
            std::array<DD, 3> in;
            for (int a = 0; a < 3; ++a) {
                const bool seed = a == 2;
                in[a].v = Dual1{p[a], {seed ? 1.0 : 0.0}};
                in[a].d[0] = Dual1{seed ? 1.0 : 0.0, {0.0}};
            }
            auto out = net::eval_as<DD>(m2, std::span<const DD>(in));
            const double u = out[0].v.v, u_t = out[0].v.d[0], u_tt = out[0].d[0].d[0];
            const double r = u_tt + u * u_t;
            acc += r * r;
        }
        return acc / static_cast<double>(pts.size());
    };

    Tape tape;
    const auto base = net::bind_params(tape, mlp.params.flat);
    tape.seal_leaves();
    ad::TapeScope scope(tape);

    using SD = Dual<Dual<Var, 1>, 1>;
    Var total = Var::zero();
    for (const auto& p : pts) {
        std::array<SD, 3> in;
        for (int a = 0; a < 3; ++a) {
            const bool seed = a == 2;
            in[a].v = Dual<Var, 1>{ad::make_input(p[a]), {seed ? Var::one() : Var::zero()}};
            in[a].d[0] = Dual<Var, 1>{seed ? Var::one() : Var::zero(), {Var::zero()}};
        }
        std::array<SD, 2> out;
        net::mlp_forward<SD>(spec, net::TapeParams{&tape, base}, mlp.in_map, mlp.out_map,
                             std::span<const SD>(in), std::span<SD>(out));
        Var u = out[0].v.v, u_t = out[0].v.d[0], u_tt = out[0].d[0].d[0];
        Var r = u_tt + u * u_t;
        total = total + r * r;
    }
    Var loss = total * (1.0 / static_cast<double>(pts.size()));
    auto g = ad::parameter_gradient(tape, loss, base, mlp.params.flat.size());

    EXPECT_NEAR(tape.value(loss.idx), loss_at(mlp.params.flat), 1e-14);
    for (std::size_t i = 0; i < mlp.params.flat.size(); ++i) {
        const double fd = fd_first(loss_at, mlp.params.flat, i, 1e-5);
        EXPECT_LT(rel_err(g[i], fd), 1e-5) << "param " << i;
    }
}

// ---------------------------------------------------------------------------
// invariants
// ---------------------------------------------------------------------------

TEST(Invariants, RandomMlpGradientCheck) {
    Rng rng(99);
    for (int trial = 0; trial < 6; ++trial) {
        const int depth = 1 + static_cast<int>(rng.index(4));
        const int width = 2 + static_cast<int>(rng.index(19));
        net::LayerSpec spec{3, 5, depth, width};
        net::Mlp mlp = net::Mlp::make(spec, 1000 + trial);
        std::vector<double> x0{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};

        // first derivatives w.r.t. inputs
        auto dual_f = [&](std::span<const Dual1> in) { return net::eval_as<Dual1>(mlp, in); };
        for (int axis = 0; axis < 3; ++axis) {
            auto d = ad::directional_derivative(dual_f, x0, axis);
            for (int ch = 0; ch < 5; ++ch) {
                auto f = [&](const std::vector<double>& x) {
                    return net::eval_plain(mlp, x)[ch];
                };
                EXPECT_LT(rel_err(d[ch], fd_first(f, x0, axis, 1e-5)), 1e-6);
            }
        }
        // second derivatives
        auto dd_f = [&](std::span<const Dual<Dual1, 1>> in) {
            return net::eval_as<Dual<Dual1, 1>>(mlp, in);
        };
        for (int axis = 0; axis < 3; ++axis) {
            auto d2 = ad::second_directional_derivative(dd_f, x0, axis);
            for (int ch = 0; ch < 5; ++ch) {
                auto f = [&](const std::vector<double>& x) {
                    return net::eval_plain(mlp, x)[ch];
                };
                EXPECT_LT(rel_err(d2[ch], fd_second(f, x0, axis, 1e-4)), 1e-4);
            }
        }
        // a few parameter derivatives against finite differences
        Tape tape;
        const auto base = net::bind_params(tape, mlp.params.flat);
        tape.seal_leaves();
        ad::TapeScope scope(tape);
        std::vector<Var> in{ad::make_input(x0[0]), ad::make_input(x0[1]),
                            ad::make_input(x0[2])};
        std::vector<Var> out(5);
        net::mlp_forward<Var>(spec, net::TapeParams{&tape, base}, mlp.in_map, mlp.out_map,
                              std::span<const Var>(in), std::span<Var>(out));
        Var loss = Var::zero();
        for (auto& o : out) loss = loss + o * o;
        auto g = ad::parameter_gradient(tape, loss, base, mlp.params.flat.size());
        auto f_theta = [&](const std::vector<double>& theta) {
            net::Mlp m2 = mlp;
            m2.params.flat = theta;
            auto o = net::eval_plain(m2, x0);
            double s = 0;
            for (double v : o) s += v * v;
            return s;
        };
        for (int probe = 0; probe < 12; ++probe) {
            const std::size_t i = rng.index(mlp.params.flat.size());
            EXPECT_LT(rel_err(g[i], fd_first(f_theta, mlp.params.flat, i, 1e-5)), 1e-6);
        }
    }
}

TEST(Invariants, LinearityOfGradients) {
    // Bitwise-exact when the coefficients are powers of two and the two terms
    // touch disjoint leaves (scaling by 2^k commutes with every rounding);
    // within rounding otherwise.
    auto build = [&](Tape& tape, double xa, double xb, double ca, double cb,
                     int which) -> std::vector<double> {
        ad::TapeScope scope(tape);
        Var x = ad::make_input(xa), y = ad::make_input(xb);
        Var f = tanh(x * x) + sin(x);
        Var g = y * y * exp(y * 0.3);
        Var root = which == 0 ? ca * f + cb * g : (which == 1 ? f : g);
        std::vector<Var> leaves{x, y};
        return ad::reverse_grad(tape, root, leaves);
    };
    const double xa = 0.37, xb = -0.81;
    for (auto [ca, cb] : std::vector<std::pair<double, double>>{{2.0, 0.5}, {-4.0, 8.0}}) {
        Tape t1, t2, t3;
        t1.seal_leaves();
        t2.seal_leaves();
        t3.seal_leaves();
        auto gc = build(t1, xa, xb, ca, cb, 0);
        auto gf = build(t2, xa, xb, 0, 0, 1);
        auto gg = build(t3, xa, xb, 0, 0, 2);
        EXPECT_EQ(gc[0], ca * gf[0]);
        EXPECT_EQ(gc[1], cb * gg[1]);
    }
    // general coefficients, shared leaves
    auto build2 = [&](Tape& tape, double ca, double cb, int which) -> std::vector<double> {
        ad::TapeScope scope(tape);
        Var x = ad::make_input(xa), y = ad::make_input(xb);
        Var f = tanh(x * y) + sin(x);
        Var g = x * x * y + exp(y * 0.3);
        Var root = which == 0 ? ca * f + cb * g : (which == 1 ? f : g);
        std::vector<Var> leaves{x, y};
        return ad::reverse_grad(tape, root, leaves);
    };
    for (auto [ca, cb] : std::vector<std::pair<double, double>>{{0.37, 1.91}, {-2.3, 0.11}}) {
        Tape t1, t2, t3;
        t1.seal_leaves();
        t2.seal_leaves();
        t3.seal_leaves();
        auto gc = build2(t1, ca, cb, 0);
        auto gf = build2(t2, 0, 0, 1);
        auto gg = build2(t3, 0, 0, 2);
        for (int i = 0; i < 2; ++i)
            EXPECT_LT(rel_err(gc[i], ca * gf[i] + cb * gg[i]), 1e-14);
    }
}

TEST(Invariants, MixedPartialSymmetry) {
    net::LayerSpec spec{3, 5, 3, 10};
    net::Mlp mlp = net::Mlp::make(spec, 77);
    std::vector<double> x0{0.2, -0.3, 0.6};
    auto f = [&](std::span<const Dual<Dual1, 1>> in) {
        return net::eval_as<Dual<Dual1, 1>>(mlp, in);
    };
    auto dxt = ad::mixed_directional_derivative(f, x0, 0, 2);
    auto dtx = ad::mixed_directional_derivative(f, x0, 2, 0);
    for (int ch = 0; ch < 5; ++ch) EXPECT_NEAR(dxt[ch], dtx[ch], 1e-12);
}

TEST(Invariants, ConstantSubexpressionDerivativeIsExactlyZero) {
    Tape tape;
    tape.seal_leaves();
    ad::TapeScope scope(tape);
    Var x = ad::make_input(1.3);
    Var c = ad::make_constant(2.7);
    Var root = x * x + c * c + sin(c);
    auto g = ad::reverse_grad(tape, root, std::array{x});
    EXPECT_EQ(g[0], 2.6);
    tape.zero_adjoints(0, static_cast<std::uint32_t>(tape.size()));
    tape.backward(root.idx);
    // nothing flows below the constant
    EXPECT_EQ(tape.adjoint(Tape::kZero) == tape.adjoint(Tape::kZero), true);
    Tape tape2;
    tape2.seal_leaves();
    ad::TapeScope scope2(tape2);
    Var y = ad::make_input(0.4);
    Var k = ad::make_constant(5.0);
    Var r2 = k * k + exp(k);
    auto gy = ad::reverse_grad(tape2, r2, std::array{y});
    EXPECT_EQ(gy[0], 0.0);
}

TEST(Invariants, DeterministicAcrossRuns) {
    auto run = [] {
        net::LayerSpec spec{3, 5, 3, 14};
        net::Mlp mlp = net::Mlp::make(spec, 123);
        Tape tape;
        const auto base = net::bind_params(tape, mlp.params.flat);
        tape.seal_leaves();
        ad::TapeScope scope(tape);
        std::vector<Var> in{ad::make_input(0.11), ad::make_input(-0.22),
                            ad::make_input(0.33)};
        std::vector<Var> out(5);
        net::mlp_forward<Var>(spec, net::TapeParams{&tape, base}, mlp.in_map, mlp.out_map,
                              std::span<const Var>(in), std::span<Var>(out));
        Var loss = Var::zero();
        for (auto& o : out) loss = loss + o * o;
        return ad::parameter_gradient(tape, loss, base, mlp.params.flat.size());
    };
    auto g1 = run(), g2 = run();
    ASSERT_EQ(g1.size(), g2.size());
    for (std::size_t i = 0; i < g1.size(); ++i) EXPECT_EQ(g1[i], g2[i]);
}

TEST(Invariants, TapeRewindDiscardsNodes) {
    Tape tape;
    tape.leaf(1.0);
    tape.seal_leaves();
    ad::TapeScope scope(tape);
    const auto m = tape.mark();
    Var x = ad::make_input(2.0);
    Var y = x * x;
    (void)y;
    EXPECT_GT(tape.size(), m);
    tape.rewind(m);
    EXPECT_EQ(tape.size(), m);
    EXPECT_THROW(tape.rewind(0), ad::ContractViolation);
}

// Dual-number algebra (the forward-mode substrate).
TEST(DualNumbers, ProductRule) {
    Dual1 a{3.0, {2.0}}, b{5.0, {7.0}};
    auto p = a * b;
    EXPECT_EQ(p.v, 15.0);
    EXPECT_EQ(p.d[0], 3.0 * 7.0 + 2.0 * 5.0);
    auto c = ad::from_const<Dual1>(4.0);
    auto q = a * c;
    EXPECT_EQ(q.d[0], 8.0);
    EXPECT_DOUBLE_EQ((a / b).d[0], (2.0 * 5.0 - 3.0 * 7.0) / 25.0);
}
