#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "pinnelast/comp/pretrain.hpp"
#include "pinnelast/run/evaluators.hpp"

using namespace pinnelast;

namespace {

geom::Geometry unit_square() { return geom::Geometry{geom::DomainVariant::rectangle, 0, 1, 0, 1}; }

comp::CompositeModel square_composite(bool dynamic, std::uint64_t seed) {
    comp::CompositeModel cm;
    const int in = dynamic ? 3 : 2;
    cm.particular = net::Mlp::make(net::LayerSpec{in, 5, 2, 8}, seed);
    cm.general = net::Mlp::make(net::LayerSpec{in, 5, 2, 10}, seed + 1);
    cm.analytic_distance = true;
    auto g = unit_square();
    geom::BoundarySegment all_edges[4] = {
        {"left", geom::EdgeId::left, geom::SegmentKind::dirichlet, 0, 1, {}},
        {"right", geom::EdgeId::right, geom::SegmentKind::dirichlet, 0, 1, {}},
        {"bottom", geom::EdgeId::bottom, geom::SegmentKind::dirichlet, 0, 1, {}},
        {"top", geom::EdgeId::top, geom::SegmentKind::dirichlet, 0, 1, {}},
    };
    std::vector<geom::BoundarySegment> segs(all_edges, all_edges + 4);
    auto hm = geom::derive_hard_map(g, segs, dynamic);
    cm.dist.box = geom::SpaceTimeBox::of(g, 0, dynamic ? 2.0 : 0.0);
    cm.dist.map = hm.map;
    cm.dist.calibrate(g);
    cm.particular_frozen = true;
    cm.distance_frozen = true;
    return cm;
}

}  // namespace

TEST(Synergy, ZeroDistanceGivesParticular) {
    comp::CompositeModel cm;
    cm.particular = net::Mlp::make(net::LayerSpec{2, 5, 2, 6}, 3);
    cm.general = net::Mlp::make(net::LayerSpec{2, 5, 2, 6}, 4);
    cm.analytic_distance = false;
    cm.distance_net = net::Mlp{net::LayerSpec{2, 5, 1, 4},
                               {},
                               {},
                               net::MlpParams::zeros(net::LayerSpec{2, 5, 1, 4})};
    std::array<double, 2> x{0.3, 0.7};
    auto u = comp::synergy_eval<double>(cm, std::span<const double>(x));
    auto up = net::eval_plain(cm.particular, x);
    for (int c = 0; c < 5; ++c) EXPECT_EQ(u[c], up[c]);
}

TEST(Synergy, UnitDistanceGivesGeneralPlusZeroParticular) {
    comp::CompositeModel cm;
    cm.particular = net::Mlp{net::LayerSpec{2, 5, 1, 4},
                             {},
                             {},
                             net::MlpParams::zeros(net::LayerSpec{2, 5, 1, 4})};
    cm.general = net::Mlp::make(net::LayerSpec{2, 5, 2, 6}, 5);
    cm.analytic_distance = false;
    cm.distance_net = net::Mlp{net::LayerSpec{2, 5, 1, 4},
                               {},
                               {},
                               net::MlpParams::zeros(net::LayerSpec{2, 5, 1, 4})};
    cm.distance_net.out_map.shift = {1, 1, 1, 1, 1};
    std::array<double, 2> x{0.4, 0.2};
    auto u = comp::synergy_eval<double>(cm, std::span<const double>(x));
    auto uh = net::eval_plain(cm.general, x);
    for (int c = 0; c < 5; ++c) EXPECT_EQ(u[c], uh[c]);
}

TEST(Synergy, ChannelMismatchRejected) {
    comp::CompositeModel cm;
    cm.particular = net::Mlp::make(net::LayerSpec{2, 2, 1, 4}, 1);
    cm.general = net::Mlp::make(net::LayerSpec{2, 5, 1, 4}, 2);
    std::array<double, 2> x{0.1, 0.1};
    EXPECT_THROW(comp::synergy_eval<double>(cm, std::span<const double>(x)),
                 ad::ContractViolation);
}

// Product rule replay: d/dt of the composite equals the assembly from
// separately differentiated factors.
TEST(Synergy, TimeDerivativeMatchesProductRuleReplay) {
    comp::CompositeModel cm = square_composite(true, 11);
    Rng rng(6);
    using D1 = ad::Dual<double, 1>;
    for (int trial = 0; trial < 25; ++trial) {
        const double x = rng.uniform(0.05, 0.95), y = rng.uniform(0.05, 0.95),
                     t = rng.uniform(0.05, 1.95);
        // full composite derivative
        std::array<D1, 3> in{D1{x, {0.0}}, D1{y, {0.0}}, D1{t, {1.0}}};
        auto u = comp::synergy_eval<D1>(cm, std::span<const D1>(in));
        // separately differentiated factors
        std::vector<D1> up(5), uh(5);
        net::mlp_forward<D1>(cm.particular.spec,
                             net::DenseParams{cm.particular.params.flat.data()},
                             cm.particular.in_map, cm.particular.out_map,
                             std::span<const D1>(in), std::span<D1>(up));
        net::mlp_forward<D1>(cm.general.spec, net::DenseParams{cm.general.params.flat.data()},
                             cm.general.in_map, cm.general.out_map, std::span<const D1>(in),
                             std::span<D1>(uh));
        for (int c = 0; c < 5; ++c) {
            const D1 d = comp::distance_factor<D1>(cm, c, std::span<const D1>(in));
            const double assembled = up[c].d[0] + d.d[0] * uh[c].v + d.v * uh[c].d[0];
            EXPECT_NEAR(u[c].d[0], assembled, 1e-12 * std::max(1.0, std::abs(assembled)));
        }
    }
}

// Randomizing the general network must not move boundary values at all when
// the closed-form distance vanishes there.
TEST(Synergy, BoundaryValuesIndependentOfGeneralNet) {
    comp::CompositeModel cm = square_composite(false, 21);
    std::vector<std::array<double, 2>> bpts;
    Rng rng(7);
    for (int i = 0; i < 10; ++i) {
        bpts.push_back({0.0, rng.uniform(0, 1)});
        bpts.push_back({1.0, rng.uniform(0, 1)});
        bpts.push_back({rng.uniform(0, 1), 0.0});
        bpts.push_back({rng.uniform(0, 1), 1.0});
    }
    std::vector<std::array<double, 5>> baseline;
    for (const auto& p : bpts)
        baseline.push_back(comp::synergy_eval<double>(cm, std::span<const double>(p.data(), 2)));
    for (int re = 0; re < 10; ++re) {
        cm.general = net::Mlp::make(cm.general.spec, 1000 + re);
        for (std::size_t i = 0; i < bpts.size(); ++i) {
            auto u = comp::synergy_eval<double>(
                cm, std::span<const double>(bpts[i].data(), 2));
            for (int c = 0; c < 2; ++c)
                EXPECT_LE(std::abs(u[c] - baseline[i][c]), 1e-12)
                    << "boundary value moved under re-randomization";
        }
    }
}

// With the time-squared factor, the composite's velocity at t = 0 is exactly
// the particular net's velocity.
TEST(Synergy, InitialVelocityReducesToParticular) {
    comp::CompositeModel cm = square_composite(true, 31);
    Rng rng(8);
    using D1 = ad::Dual<double, 1>;
    for (int trial = 0; trial < 20; ++trial) {
        const double x = rng.uniform(0, 1), y = rng.uniform(0, 1);
        std::array<D1, 3> in{D1{x, {0.0}}, D1{y, {0.0}}, D1{0.0, {1.0}}};
        auto u = comp::synergy_eval<D1>(cm, std::span<const D1>(in));
        std::vector<D1> up(5);
        net::mlp_forward<D1>(cm.particular.spec,
                             net::DenseParams{cm.particular.params.flat.data()},
                             cm.particular.in_map, cm.particular.out_map,
                             std::span<const D1>(in), std::span<D1>(up));
        for (int c = 0; c < 2; ++c) EXPECT_EQ(u[c].d[0], up[c].d[0]);
    }
}

// --- pre-training -----------------------------------------------------------------

TEST(PretrainDistance, ZeroTargetsReachZeroWithZeroNet) {
    comp::CompositeModel cm;
    cm.analytic_distance = false;
    net::LayerSpec dspec{2, 5, 1, 4};
    cm.distance_net = net::Mlp{dspec, {}, {}, net::MlpParams::zeros(dspec)};
    std::vector<comp::DistanceLoss::Sample> samples;
    for (int i = 0; i < 20; ++i)
        samples.push_back({0.05 * i, 0.3, 0.0, {0, 0, 0, 0, 0}});
    comp::DistanceLoss loss(cm.distance_net, samples, {}, false);
    std::vector<double> g(cm.distance_net.params.flat.size());
    EXPECT_EQ(loss.eval(cm.distance_net.params.flat, g), 0.0);
}

TEST(PretrainDistance, QuarterPlateTargetsReachPaperLevel) {
    // 4x10 network on the static quarter-plate distance targets
    geom::Geometry g{geom::DomainVariant::rect_corner_hole, 0, 0.5, 0, 0.5, 0, 0, 0.1};
    geom::BoundarySegment left{"left", geom::EdgeId::left, geom::SegmentKind::symmetry_x, 0.1,
                               0.5, {}};
    geom::BoundarySegment bottom{"bottom", geom::EdgeId::bottom, geom::SegmentKind::symmetry_y,
                                 0.1, 0.5, {}};
    geom::BoundarySegment right{"right", geom::EdgeId::right, geom::SegmentKind::neumann, 0,
                                0.5, {}};
    geom::BoundarySegment top{"top", geom::EdgeId::top, geom::SegmentKind::traction_free, 0,
                              0.5, {}};
    std::vector<geom::BoundarySegment> segs{left, bottom, right, top};
    auto hm = geom::derive_hard_map(g, segs, false);
    auto box = geom::SpaceTimeBox::of(g, 0, 0);

    comp::CompositeModel cm;
    cm.analytic_distance = false;
    cm.distance_net = net::Mlp::make(net::LayerSpec{2, 5, 4, 10}, 77);
    std::vector<double> lo{g.x0, g.y0}, hi{g.x1, g.y1};
    cm.distance_net.in_map = net::InputAffine::to_unit_box(lo, hi);

    // 400 grid points plus 60 notch points, as in the defected-plate setup
    std::vector<comp::DistanceLoss::Sample> samples;
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) {
            const double x = g.x0 + (g.x1 - g.x0) * (i + 0.5) / 20;
            const double y = g.y0 + (g.y1 - g.y0) * (j + 0.5) / 20;
            if (!g.inside(x, y)) continue;
            auto d = geom::distance_targets(x, y, 0.0, hm.map, box);
            samples.push_back({x, y, 0.0, d});
        }
    for (int k = 0; k < 60; ++k) {
        const double a = 0.5 * M_PI * (k + 0.5) / 60;
        const double x = 0.1 * std::cos(a), y = 0.1 * std::sin(a);
        auto d = geom::distance_targets(x, y, 0.0, hm.map, box);
        samples.push_back({x, y, 0.0, d});
    }

    train::Schedule sched;
    sched.stages = {{train::OptKind::adam, 800, 3e-3, 0, 0},
                    {train::OptKind::lbfgs, 9000, 0, 1e-11, 0}};
    auto res = comp::pretrain_distance(cm, samples, {}, false, sched, 5e-6);
    EXPECT_LE(res.final_loss, 5e-6);
    EXPECT_TRUE(cm.distance_frozen);

    // held-out points: MSE within 10x of the training loss
    Rng rng(9);
    double held = 0;
    int n = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const double x = rng.uniform(0, 0.5), y = rng.uniform(0, 0.5);
        if (!g.inside(x, y)) continue;
        auto target = geom::distance_targets(x, y, 0.0, hm.map, box);
        auto got = net::eval_plain(cm.distance_net, std::array<double, 2>{x, y});
        for (int c = 0; c < 5; ++c) held += (got[c] - target[c]) * (got[c] - target[c]);
        n += 5;
    }
    held /= n;
    EXPECT_LE(held, 10 * std::max(res.final_loss, 1e-7));
}

TEST(PretrainParticular, ZeroConditionsZeroNet) {
    comp::CompositeModel cm;
    net::LayerSpec pspec{2, 5, 1, 4};
    cm.particular = net::Mlp{pspec, {}, {}, net::MlpParams::zeros(pspec)};
    cm.general = net::Mlp::make(net::LayerSpec{2, 5, 1, 4}, 3);
    run::ProblemSets sets;
    for (int i = 0; i < 12; ++i) {
        geom::BcPoint b;
        b.x = 0.0;
        b.y = i / 12.0;
        b.dir_mask = 3;
        sets.boundary.push_back(b);
    }
    train::Schedule sched;
    sched.stages = {{train::OptKind::lbfgs, 5, 0, 1e-12, 1e-15}};
    auto res = comp::pretrain_particular(cm, sets, elast::Material{10, 0.3, 0, elast::PlaneMode::stress},
                                         false, sched, 1e-20, 1);
    EXPECT_EQ(res.final_loss, 0.0);
    EXPECT_TRUE(cm.particular_frozen);
}

TEST(PretrainParticular, HeldOutDirichletWithinTenfold) {
    // forced-displacement square plate conditions
    geom::Geometry g = unit_square();
    geom::BoundarySegment bottom{"bottom", geom::EdgeId::bottom, geom::SegmentKind::dirichlet,
                                 0, 1, {}};
    geom::BoundarySegment top_left{"top_left", geom::EdgeId::top, geom::SegmentKind::dirichlet,
                                   0, 0.5, {}};
    top_left.value.kind = geom::ValueFn::Kind::const_vec;
    top_left.value.vec = {0.0, 0.1};
    geom::BoundarySegment left{"left", geom::EdgeId::left, geom::SegmentKind::traction_free, 0,
                               1, {}};
    geom::BoundarySegment right{"right", geom::EdgeId::right, geom::SegmentKind::traction_free,
                                0, 1, {}};
    geom::BoundarySegment top_right{"top_right", geom::EdgeId::top,
                                    geom::SegmentKind::traction_free, 0.5, 1, {}};
    std::vector<geom::BoundarySegment> segs{bottom, top_left, left, right, top_right};
    geom::CollocationConfig cc;
    cc.interior = 1;
    cc.per_segment = {60, 40, 40, 40, 30};
    auto set = geom::build_collocation(g, segs, {}, cc, 17);

    comp::CompositeModel cm;
    cm.particular = net::Mlp::make(net::LayerSpec{2, 5, 3, 16}, 5);
    std::vector<double> lo{0, 0}, hi{1, 1};
    cm.particular.in_map = net::InputAffine::to_unit_box(lo, hi);
    cm.general = net::Mlp::make(net::LayerSpec{2, 5, 1, 4}, 6);

    run::ProblemSets sets;
    sets.boundary = set.boundary;
    train::Schedule sched;
    sched.stages = {{train::OptKind::adam, 300, 1e-2, 0, 0},
                    {train::OptKind::lbfgs, 2500, 0, 1e-11, 1e-16}};
    elast::Material mat{10, 0.2, 0, elast::PlaneMode::stress};
    auto res = comp::pretrain_particular(cm, sets, mat, false, sched, 1e-6, 2);
    EXPECT_LE(res.final_loss, 1e-6);

    // held-out Dirichlet points
    double mse = 0;
    int n = 0;
    for (int k = 0; k < 50; ++k) {
        const double s = (k + 0.5) / 50;
        auto u_b = net::eval_plain(cm.particular, std::array<double, 2>{s, 0.0});
        mse += u_b[0] * u_b[0] + u_b[1] * u_b[1];
        n += 2;
        if (s < 0.5) {
            auto u_t = net::eval_plain(cm.particular, std::array<double, 2>{s, 1.0});
            mse += u_t[0] * u_t[0] + (u_t[1] - 0.1) * (u_t[1] - 0.1);
            n += 2;
        }
    }
    mse /= n;
    EXPECT_LE(mse, 10 * std::max(res.final_loss, 1e-8));
}

TEST(HardTrain, RequiresFrozenFactorsAndExposesOnlyGeneralParams) {
    comp::CompositeModel cm = square_composite(false, 41);
    run::ProblemSets sets;
    Rng rng(10);
    for (int i = 0; i < 64; ++i)
        sets.interior.push_back({rng.uniform(0.02, 0.98), rng.uniform(0.02, 0.98), 0.0});
    elast::Material mat{10, 0.2, 0, elast::PlaneMode::stress};

    // unfrozen -> contract violation
    comp::CompositeModel bad = cm;
    bad.particular_frozen = false;
    train::Schedule sched;
    sched.stages = {{train::OptKind::lbfgs, 5, 0, 1e-10, 1e-14}};
    EXPECT_THROW(comp::hard_train(bad, sets, mat, {}, false, sched, 1), ad::ContractViolation);

    // frozen path trains and the optimizer sees exactly the general params
    const auto before_p = cm.particular.params.flat;
    run::BatchedPinnLoss::Config cfg;
    cfg.form = run::Formulation::mixed_hard;
    cfg.material = mat;
    cfg.threads = 1;
    run::BatchedPinnLoss probe(cm.general, cfg, sets, &cm);
    EXPECT_EQ(probe.param_count(), cm.general.params.flat.size());

    train::Schedule sched2;
    sched2.stages = {{train::OptKind::lbfgs, 40, 0, 1e-12, 1e-16}};
    auto rep = comp::hard_train(cm, sets, mat, {}, false, sched2, 2, 1);
    // accepted quasi-Newton steps never increase the loss
    double prev = 1e300;
    for (const auto& r : rep.trace) {
        EXPECT_LE(r.jp, prev * (1 + 1e-12));
        prev = r.jp;
    }
    // frozen parameters are bit-identical after training
    for (std::size_t i = 0; i < before_p.size(); ++i)
        EXPECT_EQ(cm.particular.params.flat[i], before_p[i]);
}

TEST(Checkpoints, CompositeRoundTripWithRolesAndFreeze) {
    auto dir = std::filesystem::temp_directory_path() / "pinnelast_comp_ckpt";
    std::filesystem::create_directories(dir);
    comp::CompositeModel cm = square_composite(false, 51);
    comp::save_composite(dir.string(), cm);
    auto p = net::load_checkpoint((dir / "particular.ckpt").string());
    EXPECT_EQ(p.role, net::NetRole::particular);
    EXPECT_TRUE(p.frozen);
    auto gg = net::load_checkpoint((dir / "general.ckpt").string());
    EXPECT_EQ(gg.role, net::NetRole::general);
    std::filesystem::remove_all(dir);
}
