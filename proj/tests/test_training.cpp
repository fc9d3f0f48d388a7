#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "pinnelast/train/adam.hpp"
#include "pinnelast/train/lbfgs.hpp"
#include "pinnelast/train/schedule.hpp"

using namespace pinnelast;
using train::AdamState;
using train::LbfgsOptions;
using train::LbfgsStatus;

TEST(Adam, ZeroGradientIsFixedPoint) {
    AdamState st(3, 0.1);
    std::vector<double> theta{1.0, -2.0, 0.5};
    std::vector<double> grad{0, 0, 0};
    auto before = theta;
    for (int i = 0; i < 5; ++i) adam_step(st, theta, grad);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(theta[i], before[i]);
}

TEST(Adam, QuadraticTrajectoryMatchesScalarSimulation) {
    // independent scalar simulation of the update equations, written against
    // the published rules; momentum overshoots the origin near step 11, so
    // |theta| is monotone on the initial segment and contracted at the end
    double sm = 0, sv = 0, sth = 1.0;
    std::vector<double> expected;
    for (int t = 1; t <= 50; ++t) {
        const double g = 2 * sth;
        sm = 0.9 * sm + (1 - 0.9) * g;
        sv = 0.999 * sv + (1 - 0.999) * g * g;
        const double mb = sm / (1 - std::pow(0.9, static_cast<double>(t)));
        const double vb = sv / (1 - std::pow(0.999, static_cast<double>(t)));
        sth -= 0.1 * mb / (std::sqrt(vb) + 1e-8);
        expected.push_back(sth);
    }

    AdamState st(1, 0.1);
    std::vector<double> theta{1.0};
    double prev = std::abs(theta[0]);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> grad{2 * theta[0]};
        adam_step(st, theta, grad);
        EXPECT_EQ(theta[0], expected[i]) << "diverged from the simulation at step " << i;
        if (i < 10) {
            EXPECT_LT(std::abs(theta[0]), prev);
            prev = std::abs(theta[0]);
        }
    }
    EXPECT_LT(std::abs(theta[0]), 0.5);
}

TEST(Adam, FirstStepMagnitudeEqualsLearningRate) {
    // closed form at t = 1: |step| = lr |g| / (|g| + eps), which is the
    // learning rate for any gradient scale well above eps
    for (double g0 : {1e-3, 1.0, 1e6, -42.0}) {
        AdamState st(1, 5e-4);
        std::vector<double> theta{0.0};
        std::vector<double> grad{g0};
        adam_step(st, theta, grad);
        const double expect = 5e-4 * std::abs(g0) / (std::abs(g0) + st.eps);
        EXPECT_DOUBLE_EQ(std::abs(theta[0]), expect);
        EXPECT_NEAR(std::abs(theta[0]), 5e-4, 5e-4 * 1e-4);
        EXPECT_EQ(theta[0] < 0, g0 > 0);
    }
}

TEST(Adam, NonFiniteGradientAborts) {
    AdamState st(2, 0.1);
    std::vector<double> theta{1.0, 1.0};
    std::vector<double> grad{1.0, std::numeric_limits<double>::quiet_NaN()};
    EXPECT_THROW(adam_step(st, theta, grad), train::NumericalAbort);
}

TEST(Lbfgs, ConvexQuadraticConvergesFast) {
    // SPD quadratic in 10 dims with controlled conditioning (kappa = 4)
    const int n = 10;
    Eigen::VectorXd h(n);
    for (int i = 0; i < n; ++i) h(i) = std::sin(1.7 * i + 0.3) + 1.5;
    Eigen::MatrixXd Q =
        Eigen::MatrixXd::Identity(n, n) - 2.0 * (h * h.transpose()) / h.squaredNorm();
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) d(i) = std::pow(4.0, i / (n - 1.0));
    Eigen::MatrixXd A = Q * d.asDiagonal() * Q.transpose();
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) b(i) = std::cos(0.9 * i) * 2.0;
    train::Objective f = [&](std::span<const double> x, std::span<double> g) {
        Eigen::Map<const Eigen::VectorXd> xv(x.data(), n);
        Eigen::VectorXd gv = A * xv - b;
        for (int i = 0; i < n; ++i) g[i] = gv(i);
        return 0.5 * xv.dot(A * xv) - b.dot(xv);
    };
    std::vector<double> x(n, 0.0);
    LbfgsOptions opt;
    opt.tol_grad = 1e-10;
    opt.tol_rel_loss = 0;  // run to the gradient tolerance
    opt.max_iterations = 30;
    auto rep = train::lbfgs_minimize(f, x, opt);
    EXPECT_EQ(rep.status, LbfgsStatus::converged_gradient);
    EXPECT_LE(rep.iterations, 30);
    EXPECT_LT(rep.grad_norm, 1e-10);
    EXPECT_TRUE(rep.all_steps_wolfe);
}

TEST(Lbfgs, RosenbrockFromStandardStart) {
    train::Objective f = [](std::span<const double> x, std::span<double> g) {
        const double a = x[0], b = x[1];
        g[0] = -2 * (1 - a) - 400 * a * (b - a * a);
        g[1] = 200 * (b - a * a);
        return (1 - a) * (1 - a) + 100 * (b - a * a) * (b - a * a);
    };
    std::vector<double> x{-1.2, 1.0};
    LbfgsOptions opt;
    opt.tol_grad = 1e-12;
    opt.tol_rel_loss = 0;  // run to the gradient tolerance
    opt.max_iterations = 200;
    auto rep = train::lbfgs_minimize(f, x, opt);
    EXPECT_LT(rep.final_loss, 1e-8);
    EXPECT_LE(rep.iterations, 200);
    EXPECT_NEAR(x[0], 1.0, 1e-4);
    EXPECT_NEAR(x[1], 1.0, 1e-4);
}

TEST(Lbfgs, StationaryStartReturnsImmediately) {
    train::Objective f = [](std::span<const double> x, std::span<double> g) {
        g[0] = 2 * x[0];
        return x[0] * x[0];
    };
    std::vector<double> x{0.0};
    auto rep = train::lbfgs_minimize(f, x, LbfgsOptions{});
    EXPECT_EQ(rep.status, LbfgsStatus::already_minimized);
    EXPECT_EQ(rep.iterations, 0);
}

TEST(Lbfgs, AcceptedStepsNeverIncreaseLoss) {
    train::Objective f = [](std::span<const double> x, std::span<double> g) {
        double v = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            v += std::pow(x[i] - 0.3 * static_cast<double>(i), 4) + x[i] * x[i];
            g[i] = 4 * std::pow(x[i] - 0.3 * static_cast<double>(i), 3) + 2 * x[i];
        }
        return v;
    };
    std::vector<double> x{2.0, -1.0, 0.5, 3.0};
    double prev = 1e300;
    LbfgsOptions opt;
    opt.max_iterations = 60;
    auto rep = train::lbfgs_minimize(f, x, opt, [&](int, double fx, double, bool wolfe) {
        EXPECT_LE(fx, prev * (1 + 1e-15));
        EXPECT_TRUE(wolfe);
        prev = fx;
    });
    (void)rep;
}

// --- schedules -------------------------------------------------------------

namespace {
// deterministic toy loss for schedule plumbing tests
class ToyLoss final : public train::TrainableLoss {
  public:
    double eval(std::span<const double> theta, std::span<double> grad) override {
        double f = 0;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double d = theta[i] - 1.0;
            f += d * d;
            grad[i] = 2 * d;
        }
        last_.total = f;
        last_.jg = f;
        return f;
    }
    train::LossBreakdown last_breakdown() const override { return last_; }

  private:
    train::LossBreakdown last_;
};
}  // namespace

TEST(Schedule, ZeroStagesRejected) {
    train::Schedule s;
    EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Schedule, StageBoundariesAppearInTrace) {
    // default staged recipe: 2000 Adam at 1e-3, 2000 Adam at 5e-4, then lbfgs
    ToyLoss loss;
    std::vector<double> theta{5.0, -3.0};
    train::Schedule sched;
    sched.stages = {
        {train::OptKind::adam, 2000, 1e-3, 0, 0},
        {train::OptKind::adam, 2000, 5e-4, 0, 0},
        {train::OptKind::lbfgs, 50, 0, 1e-10, 1e-14},
    };
    auto rep = train::run_schedule(loss, theta, sched, 1);
    int max_iter_stage0 = 0, max_iter_stage1 = 0;
    for (const auto& r : rep.trace) {
        if (r.stage == 0) max_iter_stage0 = std::max(max_iter_stage0, r.iteration);
        if (r.stage == 1) max_iter_stage1 = std::max(max_iter_stage1, r.iteration);
    }
    EXPECT_EQ(max_iter_stage0, 2000);
    EXPECT_EQ(max_iter_stage1, 4000);
    EXPECT_NEAR(theta[0], 1.0, 1e-6);
}

TEST(Schedule, RepeatRunsBitIdentical) {
    auto run = [] {
        ToyLoss loss;
        std::vector<double> theta{4.0, 2.0, -1.0};
        train::Schedule sched;
        sched.stages = {{train::OptKind::adam, 300, 1e-2, 0, 0},
                        {train::OptKind::lbfgs, 40, 0, 1e-12, 1e-16}};
        auto rep = train::run_schedule(loss, theta, sched, 10);
        return std::make_pair(theta, rep.final_loss);
    };
    auto [t1, f1] = run();
    auto [t2, f2] = run();
    EXPECT_EQ(f1, f2);
    for (std::size_t i = 0; i < t1.size(); ++i) EXPECT_EQ(t1[i], t2[i]);
}

TEST(Schedule, AbortCarriesPointDiagnostic) {
    class BadLoss final : public train::TrainableLoss {
      public:
        double eval(std::span<const double>, std::span<double> grad) override {
            grad[0] = std::numeric_limits<double>::infinity();
            return 1.0;
        }
        train::LossBreakdown last_breakdown() const override { return {}; }
        std::string worst_point_diagnostic() const override { return "interior point 7"; }
    };
    BadLoss loss;
    std::vector<double> theta{1.0};
    train::Schedule sched;
    sched.stages = {{train::OptKind::adam, 10, 1e-3, 0, 0}};
    auto rep = train::run_schedule(loss, theta, sched);
    EXPECT_TRUE(rep.aborted);
    EXPECT_NE(rep.abort_message.find("interior point 7"), std::string::npos);
}
