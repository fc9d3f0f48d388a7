#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "pinnelast/train/adam.hpp"
#include "pinnelast/train/lbfgs.hpp"

namespace pinnelast::train {

/// Loss components reported per iteration.
struct LossBreakdown {
    double total = 0, jg = 0, jbc = 0, jic = 0;
};

/// What a schedule optimizes: a full-batch objective that also exposes the
/// component breakdown of its last evaluation and a point diagnostic for
/// numerical aborts.
class TrainableLoss {
  public:
    virtual ~TrainableLoss() = default;
    virtual double eval(std::span<const double> theta, std::span<double> grad) = 0;
    virtual LossBreakdown last_breakdown() const = 0;
    virtual std::string worst_point_diagnostic() const { return "(no point diagnostics)"; }
};

enum class OptKind { adam, lbfgs };

struct Stage {
    OptKind kind = OptKind::adam;
    int iterations = 1000;
    double learning_rate = 1e-3;  // adam only
    double tol_grad = 1e-8;       // lbfgs
    double tol_rel_loss = 1e-12;  // lbfgs
    int memory = 10;              // lbfgs history length
};

struct Schedule {
    std::vector<Stage> stages;
    std::uint64_t seed = 0;

    void validate() const {
        if (stages.empty()) throw std::invalid_argument("schedule: at least one stage required");
        for (const auto& s : stages)
            if (s.iterations < 0) throw std::invalid_argument("schedule: negative budget");
    }
};

struct TraceRow {
    int iteration = 0;  // global, monotone across stages
    int stage = 0;
    double jg = 0, jbc = 0, jic = 0, jp = 0;
    double grad_norm = 0;
};

struct TrainReport {
    std::vector<TraceRow> trace;
    double wall_seconds = 0;
    double final_loss = 0;
    LossBreakdown final_breakdown;
    LbfgsStatus lbfgs_status = LbfgsStatus::budget_exhausted;
    bool all_steps_wolfe = true;
    bool aborted = false;
    std::string abort_message;
};

/// Writes the line-delimited loss log: iter stage J_g J_bc J_ic J_p grad_norm.
inline void write_trace(const std::string& path, const TrainReport& rep) {
    std::ofstream os(path, std::ios::trunc);
    os << "# iter stage J_g J_bc J_ic J_p grad_norm\n";
    os.precision(12);
    for (const auto& r : rep.trace)
        os << r.iteration << ' ' << r.stage << ' ' << r.jg << ' ' << r.jbc << ' ' << r.jic
           << ' ' << r.jp << ' ' << r.grad_norm << '\n';
}

/// Runs the stages in order on a shared parameter vector. Identical seed and
/// configuration reproduce the trace bit for bit.
inline TrainReport run_schedule(TrainableLoss& loss, std::vector<double>& theta,
                                const Schedule& schedule, int log_every = 1) {
    schedule.validate();
    TrainReport rep;
    const auto t_start = std::chrono::steady_clock::now();
    std::vector<double> grad(theta.size());
    int global_iter = 0;

    for (std::size_t si = 0; si < schedule.stages.size(); ++si) {
        const Stage& st = schedule.stages[si];
        if (st.kind == OptKind::adam) {
            AdamState astate(theta.size(), st.learning_rate);
            for (int it = 0; it < st.iterations; ++it) {
                double f;
                try {
                    f = loss.eval(theta, grad);
                    adam_step(astate, theta, grad);
                } catch (const NumericalAbort& e) {
                    rep.aborted = true;
                    rep.abort_message =
                        std::string(e.what()) + "; worst point: " + loss.worst_point_diagnostic();
                    rep.wall_seconds =
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
                            .count();
                    return rep;
                }
                ++global_iter;
                if (global_iter % log_every == 0 || it + 1 == st.iterations) {
                    double gn = 0;
                    for (double g : grad) gn += g * g;
                    const auto parts = loss.last_breakdown();
                    rep.trace.push_back(TraceRow{global_iter, static_cast<int>(si), parts.jg,
                                                 parts.jbc, parts.jic, parts.total,
                                                 std::sqrt(gn)});
                }
                rep.final_loss = f;
            }
        } else {
            LbfgsOptions opt;
            opt.max_iterations = st.iterations;
            opt.tol_grad = st.tol_grad;
            opt.tol_rel_loss = st.tol_rel_loss;
            opt.memory = st.memory;
            Objective obj = [&](std::span<const double> th, std::span<double> g) {
                return loss.eval(th, g);
            };
            try {
                auto lrep = lbfgs_minimize(obj, theta, opt,
                                           [&](int, double f, double gn, bool) {
                                               ++global_iter;
                                               const auto parts = loss.last_breakdown();
                                               if (global_iter % log_every == 0)
                                                   rep.trace.push_back(
                                                       TraceRow{global_iter,
                                                                static_cast<int>(si), parts.jg,
                                                                parts.jbc, parts.jic,
                                                                parts.total, gn});
                                               (void)f;
                                           });
                rep.lbfgs_status = lrep.status;
                rep.all_steps_wolfe = rep.all_steps_wolfe && lrep.all_steps_wolfe;
                rep.final_loss = lrep.final_loss;
            } catch (const NumericalAbort& e) {
                rep.aborted = true;
                rep.abort_message =
                    std::string(e.what()) + "; worst point: " + loss.worst_point_diagnostic();
                break;
            }
        }
    }
    // refresh the breakdown at the final parameters
    if (!rep.aborted) {
        rep.final_loss = loss.eval(theta, grad);
        rep.final_breakdown = loss.last_breakdown();
    }
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return rep;
}

}  // namespace pinnelast::train
