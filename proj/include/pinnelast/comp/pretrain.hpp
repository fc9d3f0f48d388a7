#pragma once

#include <string>

#include "pinnelast/comp/composite.hpp"
#include "pinnelast/geom/distance.hpp"
#include "pinnelast/run/batch_loss.hpp"
#include "pinnelast/train/schedule.hpp"

namespace pinnelast::comp {

struct TrainingFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Regression loss for the learned distance network: value targets over the
/// spacetime sample plus a time-derivative penalty on the t = 0 plane.
class DistanceLoss final : public train::TrainableLoss {
  public:
    struct Sample {
        double x, y, t;
        std::array<double, geom::kChannels> target;
    };

    DistanceLoss(const net::Mlp& net, std::vector<Sample> samples,
                 std::vector<std::array<double, 2>> t0_points, bool dynamic)
        : net_(net), samples_(std::move(samples)), t0_(std::move(t0_points)),
          dynamic_(dynamic) {
        base_ = net::bind_params(tape_, net_.params.flat);
        tape_.seal_leaves();
    }

    double eval(std::span<const double> theta, std::span<double> grad) override {
        tape_.set_leaves(base_, theta);
        tape_.zero_leaf_adjoints();
        ad::TapeScope scope(tape_);
        net::TapeParams pa{&tape_, base_};
        const int C = net_.spec.output_dim;
        double value_sum = 0, vel_sum = 0;
        const double wv = 1.0 / static_cast<double>(samples_.size() * C);
        for (const auto& s : samples_) {
            const auto m = tape_.mark();
            std::array<ad::Var, 3> in{ad::make_input(s.x), ad::make_input(s.y),
                                      ad::make_input(s.t)};
            std::vector<ad::Var> out(C);
            net::mlp_forward<ad::Var>(net_.spec, pa, net_.in_map, net_.out_map,
                                      std::span<const ad::Var>(in.data(), net_.spec.input_dim),
                                      std::span<ad::Var>(out));
            ad::Var root = ad::Var::zero();
            for (int c = 0; c < C; ++c) {
                const ad::Var r = out[c] - s.target[c];
                root = root + r * r;
            }
            value_sum += root.value();
            tape_.backward(root.idx, wv);
            tape_.rewind(m);
        }
        if (dynamic_ && !t0_.empty()) {
            using S = ad::Dual<ad::Var, 1>;
            const double wt = 1.0 / static_cast<double>(t0_.size() * C);
            for (const auto& p : t0_) {
                const auto m = tape_.mark();
                std::array<S, 3> in{S{ad::make_input(p[0]), {ad::Var::zero()}},
                                    S{ad::make_input(p[1]), {ad::Var::zero()}},
                                    S{ad::make_input(0.0), {ad::Var::one()}}};
                std::vector<S> out(C);
                net::mlp_forward<S>(net_.spec, pa, net_.in_map, net_.out_map,
                                    std::span<const S>(in.data(), 3), std::span<S>(out));
                ad::Var root = ad::Var::zero();
                for (int c = 0; c < C; ++c) root = root + out[c].d[0] * out[c].d[0];
                vel_sum += root.value();
                tape_.backward(root.idx, wt);
                tape_.rewind(m);
            }
        }
        for (std::size_t i = 0; i < grad.size(); ++i)
            grad[i] = tape_.adjoint(base_ + static_cast<std::uint32_t>(i));
        const double nv = static_cast<double>(samples_.size() * C);
        last_.jg = 0;
        last_.jbc = value_sum / nv;
        last_.jic = t0_.empty() ? 0 : vel_sum / static_cast<double>(t0_.size() * C);
        last_.total = last_.jbc + last_.jic;
        return last_.total;
    }

    train::LossBreakdown last_breakdown() const override { return last_; }

  private:
    net::Mlp net_;
    std::vector<Sample> samples_;
    std::vector<std::array<double, 2>> t0_;
    bool dynamic_;
    ad::Tape tape_;
    std::uint32_t base_ = 0;
    train::LossBreakdown last_;
};

struct PretrainResult {
    train::TrainReport report;
    double final_loss = 0;
};

/// Fits the distance network to the exact min-distance targets (plus the
/// zero-velocity condition at t = 0 for dynamic problems). Fails loudly when
/// the tolerance is not reached within the budget.
inline PretrainResult pretrain_distance(CompositeModel& cm,
                                        std::vector<DistanceLoss::Sample> samples,
                                        std::vector<std::array<double, 2>> t0_points,
                                        bool dynamic, const train::Schedule& schedule,
                                        double tolerance) {
    if (cm.analytic_distance)
        throw ad::ContractViolation("pretrain_distance: composite uses the closed-form distance");
    DistanceLoss loss(cm.distance_net, std::move(samples), std::move(t0_points), dynamic);
    PretrainResult out;
    out.report = train::run_schedule(loss, cm.distance_net.params.flat, schedule, 50);
    out.final_loss = out.report.final_loss;
    if (out.report.aborted)
        throw TrainingFailure("distance pre-training aborted: " + out.report.abort_message);
    if (out.final_loss > tolerance)
        throw TrainingFailure("distance pre-training missed its tolerance: reached " +
                              std::to_string(out.final_loss) + " > " +
                              std::to_string(tolerance));
    cm.distance_frozen = true;
    return out;
}

/// Fits the particular network to the boundary/initial values alone. In the
/// mixed-variable scheme the Neumann term acts on the stress channels
/// directly (n . sigma_p = prescribed traction).
inline PretrainResult pretrain_particular(CompositeModel& cm, const run::ProblemSets& ibc_sets,
                                          const elast::Material& material, bool dynamic,
                                          const train::Schedule& schedule, double tolerance,
                                          int threads = 2) {
    if (!ibc_sets.interior.empty())
        throw ad::ContractViolation("pretrain_particular: sets must hold only I/BC points");
    run::BatchedPinnLoss::Config cfg;
    cfg.form = run::Formulation::mixed_soft;
    cfg.material = material;
    cfg.weights = elast::LossWeights{1.0, 1.0, 1.0};
    cfg.dynamic = dynamic;
    cfg.threads = threads;
    run::BatchedPinnLoss loss(cm.particular, cfg, ibc_sets);
    PretrainResult out;
    out.report = train::run_schedule(loss, cm.particular.params.flat, schedule, 50);
    out.final_loss = out.report.final_loss;
    if (out.report.aborted)
        throw TrainingFailure("particular pre-training aborted: " + out.report.abort_message);
    if (out.final_loss > tolerance)
        throw TrainingFailure("particular pre-training missed its tolerance: reached " +
                              std::to_string(out.final_loss) + " > " +
                              std::to_string(tolerance));
    cm.particular_frozen = true;
    return out;
}

/// Trains the general network against the equation residuals with the other
/// two factors frozen; the optimizer sees exactly the general net's
/// parameters.
inline train::TrainReport hard_train(CompositeModel& cm, const run::ProblemSets& sets,
                                     const elast::Material& material,
                                     const elast::LossWeights& weights, bool dynamic,
                                     const train::Schedule& schedule, int threads = 2,
                                     int log_every = 10) {
    cm.check_wiring();
    if (!cm.particular_frozen || (!cm.analytic_distance && !cm.distance_frozen))
        throw ad::ContractViolation("hard_train: pre-trained networks must be frozen first");
    run::BatchedPinnLoss::Config cfg;
    cfg.form = run::Formulation::mixed_hard;
    cfg.material = material;
    cfg.weights = weights;
    cfg.dynamic = dynamic;
    cfg.threads = threads;
    run::BatchedPinnLoss loss(cm.general, cfg, sets, &cm);
    return train::run_schedule(loss, cm.general.params.flat, schedule, log_every);
}

}  // namespace pinnelast::comp
