#pragma once

#include <algorithm>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "pinnelast/ad/batch.hpp"
#include "pinnelast/elast/loss.hpp"
#include "pinnelast/run/evaluators.hpp"
#include "pinnelast/train/schedule.hpp"

namespace pinnelast::run {

enum class Formulation { mixed_soft, mixed_hard, pure_displacement_soft };

/// Collocation data a training loss runs over. In hard mode `boundary` and
/// `initial` are empty (those conditions are built into the solution) and
/// `extra` carries the traction surfaces kept on the equation side.
struct ProblemSets {
    std::vector<std::array<double, 3>> interior;
    std::vector<geom::BcPoint> boundary;
    std::vector<geom::BcPoint> extra;
    std::vector<geom::IcPoint> initial;
};

/// Full-batch PINN loss evaluated lane-parallel on batched tapes, sharded
/// across worker threads. Shard boundaries, lane order and merge order are
/// fixed by the data alone, so results are bit-identical for any thread count.
class BatchedPinnLoss final : public train::TrainableLoss {
  public:
    struct Config {
        Formulation form = Formulation::mixed_soft;
        elast::Material material;
        elast::BodyForce body;
        elast::LossWeights weights;
        bool dynamic = false;
        int threads = 2;
        int batches_per_shard = 24;
    };

    BatchedPinnLoss(const net::Mlp& model, const Config& cfg, ProblemSets sets,
                    const comp::CompositeModel* composite = nullptr)
        : model_(model), cfg_(cfg), sets_(std::move(sets)) {
        if (cfg_.form == Formulation::mixed_hard) {
            if (!composite) throw ad::ContractViolation("hard loss: composite model required");
            if (!composite->particular_frozen ||
                (!composite->analytic_distance && !composite->distance_frozen))
                throw ad::ContractViolation(
                    "hard loss: particular/distance networks must be frozen before training");
            cache_interior_ = build_frozen_cache(*composite, sets_.interior, cfg_.dynamic, true);
            if (!sets_.extra.empty()) {
                std::vector<std::array<double, 3>> xs;
                xs.reserve(sets_.extra.size());
                for (const auto& b : sets_.extra) xs.push_back({b.x, b.y, b.t});
                cache_extra_ = build_frozen_cache(*composite, xs, false, false);
            }
        }
        build_programs();
        const int hw = static_cast<int>(std::thread::hardware_concurrency());
        if (cfg_.threads <= 0) cfg_.threads = std::max(1, hw);
        init_tapes();
    }

    std::size_t param_count() const { return model_.params.flat.size(); }

    double eval(std::span<const double> theta, std::span<double> grad) override {
        if (theta.size() != param_count() || grad.size() != param_count())
            throw ad::ContractViolation("loss eval: parameter vector length mismatch");
        for (auto& pt : tapes_) pt->tape.set_leaves(pt->base, theta);

        const std::size_t nsh = shards_.size();
        shard_loss_.assign(nsh * kComponents, 0.0);
        shard_worst_.assign(nsh, WorstPoint{});
        for (auto& g : shard_grad_) std::fill(g.begin(), g.end(), 0.0);

        std::exception_ptr first_error;
        std::mutex err_mutex;
        auto worker = [&](int tid) {
            try {
                auto& pt = *tapes_[tid];
                ad::BatchTapeScope scope(pt.tape);
                for (std::size_t s = tid; s < nsh; s += cfg_.threads) run_shard(pt, s);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        };
        if (cfg_.threads == 1) {
            worker(0);
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < cfg_.threads; ++t) pool.emplace_back(worker, t);
            for (auto& th : pool) th.join();
        }
        if (first_error) {
            try {
                std::rethrow_exception(first_error);
            } catch (const ad::BatchEvalError& e) {
                throw train::NumericalAbort(e.what());
            }
        }

        // deterministic merge in shard order
        double comp[kComponents] = {0, 0, 0};
        worst_ = WorstPoint{};
        for (std::size_t s = 0; s < nsh; ++s) {
            for (int c = 0; c < kComponents; ++c) comp[c] += shard_loss_[s * kComponents + c];
            if (shard_worst_[s].magnitude > worst_.magnitude) worst_ = shard_worst_[s];
        }
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t s = 0; s < nsh; ++s) {
            const auto& g = shard_grad_[s];
            for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += g[i];
        }

        last_.jg = comp[0];
        last_.jbc = comp[1];
        last_.jic = comp[2];
        last_.total = elast::loss_total_soft(last_.jg, last_.jbc, last_.jic, cfg_.weights);
        return last_.total;
    }

    train::LossBreakdown last_breakdown() const override { return last_; }

    std::string worst_point_diagnostic() const override {
        if (worst_.magnitude <= 0) return "(no point diagnostics)";
        std::ostringstream os;
        os << worst_.set << " point " << worst_.index << " at (" << worst_.x << ", " << worst_.y
           << ", " << worst_.t << "), point loss " << worst_.magnitude;
        return os.str();
    }

  private:
    static constexpr int kComponents = 3;  // jg, jbc, jic raw sums (already weighted by 1/N)

    enum class ProgKind { interior_mixed, interior_pure, extra_traction, bc_mixed, bc_pure, ic };

    struct Program {
        ProgKind kind;
        std::size_t start = 0, count = 0;  // range in its source vector
        double value_weight = 1;           // scales lane sums into the component value
        double seed_weight = 1;            // scales the gradient seeds (includes lambda)
        int component = 0;                 // 0 jg, 1 jbc, 2 jic
        unsigned dir_mask = 0, trac_mask = 0;
        double dir_mean_inv = 0, neu_mean_inv = 0;  // bc groups only
    };

    struct WorkItem {
        int program;
        std::size_t offset;  // batch start within the program range
        int lanes;           // valid lanes (<= kLanes)
    };

    struct PerThread {
        ad::BatchTape tape;
        std::uint32_t base = 0;
    };

    struct WorstPoint {
        double magnitude = 0;
        double x = 0, y = 0, t = 0;
        std::size_t index = 0;
        const char* set = "";
    };

    void build_programs() {
        const bool pure = cfg_.form == Formulation::pure_displacement_soft;
        if (!sets_.interior.empty()) {
            Program p;
            p.kind = pure ? ProgKind::interior_pure : ProgKind::interior_mixed;
            p.start = 0;
            p.count = sets_.interior.size();
            p.value_weight = 1.0 / static_cast<double>(sets_.interior.size());
            p.seed_weight = p.value_weight;
            p.component = 0;
            programs_.push_back(p);
        }
        if (!sets_.extra.empty()) {
            // group by traction mask so every batch has a uniform graph
            std::stable_sort(sets_.extra.begin(), sets_.extra.end(),
                             [](const geom::BcPoint& a, const geom::BcPoint& b) {
                                 return a.trac_mask < b.trac_mask;
                             });
            const double inv = 1.0 / static_cast<double>(sets_.extra.size());
            std::size_t i = 0;
            while (i < sets_.extra.size()) {
                std::size_t j = i;
                while (j < sets_.extra.size() &&
                       sets_.extra[j].trac_mask == sets_.extra[i].trac_mask)
                    ++j;
                Program p;
                p.kind = ProgKind::extra_traction;
                p.start = i;
                p.count = j - i;
                p.trac_mask = sets_.extra[i].trac_mask;
                p.value_weight = cfg_.weights.extra_traction * inv;
                p.seed_weight = p.value_weight;
                p.component = 0;
                programs_.push_back(p);
                i = j;
            }
        }
        if (!sets_.boundary.empty()) {
            // group by mask pair so every batch has a uniform graph
            std::stable_sort(sets_.boundary.begin(), sets_.boundary.end(),
                             [](const geom::BcPoint& a, const geom::BcPoint& b) {
                                 return std::make_pair(a.dir_mask, a.trac_mask) <
                                        std::make_pair(b.dir_mask, b.trac_mask);
                             });
            std::size_t nd = 0, nn = 0;
            for (const auto& b : sets_.boundary) {
                nd += b.dir_mask != 0;
                nn += b.trac_mask != 0;
            }
            std::size_t i = 0;
            while (i < sets_.boundary.size()) {
                std::size_t j = i;
                while (j < sets_.boundary.size() &&
                       sets_.boundary[j].dir_mask == sets_.boundary[i].dir_mask &&
                       sets_.boundary[j].trac_mask == sets_.boundary[i].trac_mask)
                    ++j;
                Program p;
                p.kind = pure ? ProgKind::bc_pure : ProgKind::bc_mixed;
                p.start = i;
                p.count = j - i;
                p.dir_mask = sets_.boundary[i].dir_mask;
                p.trac_mask = sets_.boundary[i].trac_mask;
                // per-term means are baked into the root; component value is raw
                p.value_weight = 1.0;
                p.seed_weight = cfg_.weights.lambda_bc;
                p.component = 1;
                p.dir_mean_inv = nd ? 1.0 / static_cast<double>(nd) : 0.0;
                p.neu_mean_inv = nn ? 1.0 / static_cast<double>(nn) : 0.0;
                programs_.push_back(p);
                i = j;
            }
        }
        if (!sets_.initial.empty()) {
            Program p;
            p.kind = ProgKind::ic;
            p.start = 0;
            p.count = sets_.initial.size();
            p.value_weight = 1.0 / static_cast<double>(sets_.initial.size());
            p.seed_weight = cfg_.weights.lambda_ic * p.value_weight;
            p.component = 2;
            programs_.push_back(p);
        }

        for (int pi = 0; pi < static_cast<int>(programs_.size()); ++pi) {
            const auto& p = programs_[pi];
            for (std::size_t off = 0; off < p.count; off += ad::kLanes) {
                WorkItem w;
                w.program = pi;
                w.offset = off;
                w.lanes = static_cast<int>(std::min<std::size_t>(ad::kLanes, p.count - off));
                items_.push_back(w);
            }
        }
        const int per = std::max(1, cfg_.batches_per_shard);
        for (std::size_t i = 0; i < items_.size(); i += per)
            shards_.push_back({i, std::min(items_.size(), i + per)});
        shard_grad_.assign(shards_.size(), std::vector<double>(param_count(), 0.0));
    }

    void init_tapes() {
        tapes_.clear();
        for (int t = 0; t < cfg_.threads; ++t) {
            auto pt = std::make_unique<PerThread>();
            pt->base = static_cast<std::uint32_t>(pt->tape.mark());
            for (double v : model_.params.flat) pt->tape.leaf(v);
            pt->tape.seal_leaves();
            tapes_.push_back(std::move(pt));
        }
    }

    // --- batch programs -----------------------------------------------------

    using BV = ad::BVar;
    using Lanes = ad::Lanes;

    template <class Get>
    static Lanes gather(int lanes, Get&& get) {
        Lanes out;
        for (int k = 0; k < ad::kLanes; ++k) out[k] = get(std::min(k, lanes - 1));
        return out;
    }

    PointIn<BV> point_lanes(const WorkItem& w, const Program& p) const {
        auto coord = [&](int axis) {
            return gather(w.lanes, [&](int k) {
                const std::size_t i = p.start + w.offset + k;
                switch (p.kind) {
                    case ProgKind::interior_mixed:
                    case ProgKind::interior_pure: return sets_.interior[i][axis];
                    case ProgKind::extra_traction:
                        return axis == 0 ? sets_.extra[i].x
                                         : (axis == 1 ? sets_.extra[i].y : sets_.extra[i].t);
                    case ProgKind::bc_mixed:
                    case ProgKind::bc_pure:
                        return axis == 0 ? sets_.boundary[i].x
                                         : (axis == 1 ? sets_.boundary[i].y
                                                      : sets_.boundary[i].t);
                    case ProgKind::ic:
                        return axis == 0 ? sets_.initial[i].x
                                         : (axis == 1 ? sets_.initial[i].y : 0.0);
                }
                return 0.0;
            });
        };
        PointIn<BV> in;
        in.x = ad::make_binput(coord(0));
        in.y = ad::make_binput(coord(1));
        in.t = cfg_.dynamic ? ad::make_binput(coord(2)) : BV::zero();
        in.dynamic = cfg_.dynamic;
        return in;
    }

    /// Constant jets for one channel over the batch lanes.
    FrozenJet<BV> jet_lanes(const std::vector<FrozenJet<double>>& cache, const WorkItem& w,
                            const Program& p, int ch, bool derivs, bool temporal) const {
        auto pick = [&](auto sel) {
            return ad::make_bconstant(gather(w.lanes, [&](int k) {
                return sel(cache[(p.start + w.offset + k) * 5 + ch]);
            }));
        };
        FrozenJet<BV> j;
        j.v = pick([](const FrozenJet<double>& f) { return f.v; });
        if (derivs) {
            j.dx = pick([](const FrozenJet<double>& f) { return f.dx; });
            j.dy = pick([](const FrozenJet<double>& f) { return f.dy; });
        } else {
            j.dx = j.dy = BV::zero();
        }
        if (temporal) {
            j.dt = pick([](const FrozenJet<double>& f) { return f.dt; });
            j.dtt = pick([](const FrozenJet<double>& f) { return f.dtt; });
        } else {
            j.dt = j.dtt = BV::zero();
        }
        return j;
    }

    BV interior_root(PerThread& pt, const WorkItem& w, const Program& p) {
        const auto in = point_lanes(w, p);
        BatchParams pa{pt.base};
        elast::FieldDerivs<BV> f;
        if (cfg_.form == Formulation::mixed_hard) {
            std::array<FrozenJet<BV>, 5> up, dn;
            for (int c = 0; c < 5; ++c) {
                up[c] = jet_lanes(cache_interior_.up, w, p, c, true, cfg_.dynamic);
                dn[c] = jet_lanes(cache_interior_.dn, w, p, c, true, cfg_.dynamic);
            }
            f = composite_fields<BV, BV>(model_, pa, in,
                                         std::span<const FrozenJet<BV>>(up),
                                         std::span<const FrozenJet<BV>>(dn));
        } else {
            f = mixed_fields<BV>(model_, pa, in);
        }
        const std::size_t i0 = p.start + w.offset;
        const auto rm = elast::momentum_residual(f, cfg_.material, cfg_.body,
                                                 sets_.interior[i0][0], sets_.interior[i0][1],
                                                 sets_.interior[i0][2]);
        const auto rc = elast::constitutive_residual(f, cfg_.material);
        BV root = rm[0] * rm[0] + rm[1] * rm[1];
        root = root + rc[0] * rc[0] + rc[1] * rc[1] + rc[2] * rc[2];
        return root;
    }

    BV interior_pure_root(PerThread& pt, const WorkItem& w, const Program& p) {
        const auto in = point_lanes(w, p);
        BatchParams pa{pt.base};
        const auto d = displacement_fields<BV>(model_, pa, in);
        const std::size_t i0 = p.start + w.offset;
        const auto rm = elast::displacement_momentum_residual(
            d, cfg_.material, cfg_.body, sets_.interior[i0][0], sets_.interior[i0][1],
            sets_.interior[i0][2]);
        return rm[0] * rm[0] + rm[1] * rm[1];
    }

    BV extra_root(PerThread& pt, const WorkItem& w, const Program& p) {
        const auto in = point_lanes(w, p);
        BatchParams pa{pt.base};
        std::array<BV, 3> s;
        if (cfg_.form == Formulation::mixed_hard) {
            std::array<FrozenJet<BV>, 5> up, dn;
            for (int c = 0; c < 5; ++c) {
                up[c] = jet_lanes(cache_extra_.up, w, p, c, false, false);
                dn[c] = jet_lanes(cache_extra_.dn, w, p, c, false, false);
            }
            s = composite_sigma<BV, BV>(model_, pa, in, std::span<const FrozenJet<BV>>(up),
                                        std::span<const FrozenJet<BV>>(dn));
        } else {
            const auto vals = net_values<BV>(model_, pa, in);
            s = {vals[2], vals[3], vals[4]};
        }
        auto lane_of = [&](auto sel) {
            return gather(w.lanes,
                          [&](int k) { return sel(sets_.extra[p.start + w.offset + k]); });
        };
        const BV nx = ad::make_bconstant(lane_of([](const geom::BcPoint& b) { return b.nx; }));
        const BV ny = ad::make_bconstant(lane_of([](const geom::BcPoint& b) { return b.ny; }));
        const BV tx = ad::make_bconstant(lane_of([](const geom::BcPoint& b) { return b.trac[0]; }));
        const BV ty = ad::make_bconstant(lane_of([](const geom::BcPoint& b) { return b.trac[1]; }));
        const BV rx = s[0] * nx + s[2] * ny - tx;
        const BV ry = s[2] * nx + s[1] * ny - ty;
        BV root = BV::zero();
        if (p.trac_mask & 1u) root = root + rx * rx;
        if (p.trac_mask & 2u) root = root + ry * ry;
        return root;
    }

    BV bc_root(PerThread& pt, const WorkItem& w, const Program& p) {
        const auto in = point_lanes(w, p);
        BatchParams pa{pt.base};
        auto lane_of = [&](auto sel) {
            return gather(w.lanes,
                          [&](int k) { return sel(sets_.boundary[p.start + w.offset + k]); });
        };
        BV dir_term = BV::zero(), neu_term = BV::zero();
        if (cfg_.form == Formulation::pure_displacement_soft) {
            const auto d = displacement_fields<BV>(model_, pa, in);
            if (p.dir_mask) {
                if (p.dir_mask & 1u) {
                    const BV tgt =
                        ad::make_bconstant(lane_of([](const geom::BcPoint& b) { return b.dir[0]; }));
                    const BV r = d.val[0] - tgt;
                    dir_term = dir_term + r * r;
                }
                if (p.dir_mask & 2u) {
                    const BV tgt =
                        ad::make_bconstant(lane_of([](const geom::BcPoint& b) { return b.dir[1]; }));
                    const BV r = d.val[1] - tgt;
                    dir_term = dir_term + r * r;
                }
            }
            if (p.trac_mask) {
                const auto C = elast::constitutive_matrix(cfg_.material);
                const BV s11 = C[0][0] * d.dx[0] + C[0][1] * d.dy[1];
                const BV s22 = C[1][0] * d.dx[0] + C[1][1] * d.dy[1];
                const BV s12 = C[2][2] * (d.dy[0] + d.dx[1]);
                const BV nx = ad::make_bconstant(lane_of([](const geom::BcPoint& b) { return b.nx; }));
                const BV ny = ad::make_bconstant(lane_of([](const geom::BcPoint& b) { return b.ny; }));
                const BV tx = ad::make_bconstant(lane_of([](const geom::BcPoint& b) { return b.trac[0]; }));
                const BV ty = ad::make_bconstant(lane_of([](const geom::BcPoint& b) { return b.trac[1]; }));
                const BV rx = s11 * nx + s12 * ny - tx;
                const BV ry = s12 * nx + s22 * ny - ty;
                if (p.trac_mask & 1u) neu_term = neu_term + rx * rx;
                if (p.trac_mask & 2u) neu_term = neu_term + ry * ry;
            }
        } else {
            if (p.dir_mask && p.trac_mask) {
                const auto vals = net_values<BV>(model_, pa, in);
                dir_term = bc_dir_term(vals, lane_of, p);
                neu_term = bc_neu_term({vals[2], vals[3], vals[4]}, lane_of, p);
            } else if (p.dir_mask) {
                const auto vals = net_values<BV>(model_, pa, in);
                dir_term = bc_dir_term(vals, lane_of, p);
            } else if (p.trac_mask) {
                const auto vals = net_values<BV>(model_, pa, in);
                neu_term = bc_neu_term({vals[2], vals[3], vals[4]}, lane_of, p);
            }
        }
        // the two terms carry different means, so they are baked into the root
        return dir_term * p.dir_mean_inv + neu_term * p.neu_mean_inv;
    }

    template <class LaneOf>
    BV bc_dir_term(const std::array<BV, 5>& vals, LaneOf&& lane_of, const Program& p) {
        BV term = BV::zero();
        if (p.dir_mask & 1u) {
            const BV tgt = ad::make_bconstant(lane_of([](const geom::BcPoint& b) { return b.dir[0]; }));
            const BV r = vals[0] - tgt;
            term = term + r * r;
        }
        if (p.dir_mask & 2u) {
            const BV tgt = ad::make_bconstant(lane_of([](const geom::BcPoint& b) { return b.dir[1]; }));
            const BV r = vals[1] - tgt;
            term = term + r * r;
        }
        return term;
    }

    template <class LaneOf>
    BV bc_neu_term(const std::array<BV, 3>& s, LaneOf&& lane_of, const Program& p) {
        const BV nx = ad::make_bconstant(lane_of([](const geom::BcPoint& b) { return b.nx; }));
        const BV ny = ad::make_bconstant(lane_of([](const geom::BcPoint& b) { return b.ny; }));
        const BV tx = ad::make_bconstant(lane_of([](const geom::BcPoint& b) { return b.trac[0]; }));
        const BV ty = ad::make_bconstant(lane_of([](const geom::BcPoint& b) { return b.trac[1]; }));
        const BV rx = s[0] * nx + s[2] * ny - tx;
        const BV ry = s[2] * nx + s[1] * ny - ty;
        BV term = BV::zero();
        if (p.trac_mask & 1u) term = term + rx * rx;
        if (p.trac_mask & 2u) term = term + ry * ry;
        return term;
    }

    BV ic_root(PerThread& pt, const WorkItem& w, const Program& p) {
        const auto in = point_lanes(w, p);
        BatchParams pa{pt.base};
        std::array<BV, 5> u;
        std::array<BV, 2> vel;
        net_values_and_velocity<BV>(model_, pa, in, u, vel);
        auto lane_of = [&](auto sel) {
            return gather(w.lanes,
                          [&](int k) { return sel(sets_.initial[p.start + w.offset + k]); });
        };
        const BV u0 = ad::make_bconstant(lane_of([](const geom::IcPoint& q) { return q.u0[0]; }));
        const BV v0 = ad::make_bconstant(lane_of([](const geom::IcPoint& q) { return q.u0[1]; }));
        const BV ut0 = ad::make_bconstant(lane_of([](const geom::IcPoint& q) { return q.v0[0]; }));
        const BV vt0 = ad::make_bconstant(lane_of([](const geom::IcPoint& q) { return q.v0[1]; }));
        const BV ru = u[0] - u0, rv = u[1] - v0, rut = vel[0] - ut0, rvt = vel[1] - vt0;
        return ru * ru + rv * rv + rut * rut + rvt * rvt;
    }

    void run_shard(PerThread& pt, std::size_t shard) {
        const auto [lo, hi] = shards_[shard];
        pt.tape.zero_leaf_adjoints();
        double comp[kComponents] = {0, 0, 0};
        WorstPoint worst;
        for (std::size_t it = lo; it < hi; ++it) {
            const WorkItem& w = items_[it];
            const Program& p = programs_[w.program];
            const auto m = pt.tape.mark();
            BV root;
            switch (p.kind) {
                case ProgKind::interior_mixed: root = interior_root(pt, w, p); break;
                case ProgKind::interior_pure: root = interior_pure_root(pt, w, p); break;
                case ProgKind::extra_traction: root = extra_root(pt, w, p); break;
                case ProgKind::bc_mixed:
                case ProgKind::bc_pure: root = bc_root(pt, w, p); break;
                case ProgKind::ic: root = ic_root(pt, w, p); break;
            }
            ad::Lanes seeds{};
            for (int k = 0; k < w.lanes; ++k) seeds[k] = p.seed_weight;
            pt.tape.backward(root.idx, seeds);
            const auto& lv = pt.tape.value(root.idx);
            double sum = 0;
            for (int k = 0; k < w.lanes; ++k) sum += lv[k];
            comp[p.component] += sum * p.value_weight;
            if (p.kind == ProgKind::interior_mixed || p.kind == ProgKind::interior_pure) {
                for (int k = 0; k < w.lanes; ++k) {
                    if (lv[k] > worst.magnitude) {
                        const std::size_t i = p.start + w.offset + k;
                        worst = WorstPoint{lv[k], sets_.interior[i][0], sets_.interior[i][1],
                                           sets_.interior[i][2], i, "interior"};
                    }
                }
            }
            pt.tape.rewind(m);
        }
        for (int c = 0; c < kComponents; ++c) shard_loss_[shard * kComponents + c] = comp[c];
        shard_worst_[shard] = worst;
        auto& g = shard_grad_[shard];
        for (std::size_t i = 0; i < g.size(); ++i)
            g[i] = pt.tape.leaf_grad(pt.base + static_cast<std::uint32_t>(i));
    }

    net::Mlp model_;
    Config cfg_;
    ProblemSets sets_;
    FrozenCache cache_interior_, cache_extra_;

    std::vector<Program> programs_;
    std::vector<WorkItem> items_;
    std::vector<std::pair<std::size_t, std::size_t>> shards_;
    std::vector<std::unique_ptr<PerThread>> tapes_;

    std::vector<double> shard_loss_;
    std::vector<std::vector<double>> shard_grad_;
    std::vector<WorstPoint> shard_worst_;
    WorstPoint worst_;
    train::LossBreakdown last_;
};

}  // namespace pinnelast::run
