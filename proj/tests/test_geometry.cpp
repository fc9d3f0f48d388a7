#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "pinnelast/geom/distance.hpp"
#include "pinnelast/geom/geometry.hpp"
#include "pinnelast/geom/sampling.hpp"

using namespace pinnelast;
using geom::EdgeId;
using geom::SegmentKind;

namespace {

geom::Geometry quarter_plate() {
    return geom::Geometry{geom::DomainVariant::rect_corner_hole, 0, 0.5, 0, 0.5, 0, 0, 0.1};
}

std::vector<geom::BoundarySegment> quarter_plate_segments() {
    geom::BoundarySegment left{"left", EdgeId::left, SegmentKind::symmetry_x, 0.1, 0.5, {}};
    geom::BoundarySegment bottom{"bottom", EdgeId::bottom, SegmentKind::symmetry_y, 0.1, 0.5, {}};
    geom::BoundarySegment right{"right", EdgeId::right, SegmentKind::neumann, 0, 0.5, {}};
    right.value.kind = geom::ValueFn::Kind::traction_normal;
    right.value.amp = 1.0;
    geom::BoundarySegment top{"top", EdgeId::top, SegmentKind::traction_free, 0, 0.5, {}};
    geom::BoundarySegment hole{"hole", EdgeId::hole, SegmentKind::traction_free, 0, M_PI / 2, {}};
    return {left, bottom, right, top, hole};
}

}  // namespace

TEST(Lhs, SinglePointInsideBox) {
    std::array<double, 2> lo{1, 2}, hi{3, 5};
    auto pts = geom::lhs_sample(1, lo, hi, 9);
    ASSERT_EQ(pts.size(), 1u);
    EXPECT_GE(pts[0][0], 1.0);
    EXPECT_LE(pts[0][0], 3.0);
    EXPECT_GE(pts[0][1], 2.0);
    EXPECT_LE(pts[0][1], 5.0);
}

TEST(Lhs, OnePointPerDecile) {
    std::array<double, 2> lo{0, 0}, hi{1, 1};
    auto pts = geom::lhs_sample(10, lo, hi, 3);
    for (int axis = 0; axis < 2; ++axis) {
        std::vector<double> c;
        for (const auto& p : pts) c.push_back(p[axis]);
        std::sort(c.begin(), c.end());
        for (int i = 0; i < 10; ++i) {
            EXPECT_GE(c[i], i / 10.0);
            EXPECT_LT(c[i], (i + 1) / 10.0);
        }
    }
}

TEST(Lhs, StratificationHoldsForEveryAxisAndSeed) {
    for (std::uint64_t seed : {1ULL, 7ULL, 99ULL}) {
        std::array<double, 3> lo{-1, 5, 0}, hi{1, 9, 2};
        const int n = 37;
        auto pts = geom::lhs_sample(n, lo, hi, seed);
        for (int axis = 0; axis < 3; ++axis) {
            std::vector<int> strata(n, 0);
            for (const auto& p : pts) {
                const double u = (p[axis] - lo[axis]) / (hi[axis] - lo[axis]);
                const int s = std::min(n - 1, static_cast<int>(u * n));
                strata[s]++;
            }
            for (int s = 0; s < n; ++s) EXPECT_EQ(strata[s], 1) << "axis " << axis;
        }
    }
}

TEST(Lhs, MeanApproachesBoxCentre) {
    std::array<double, 2> lo{0, 2}, hi{2, 6};
    auto pts = geom::lhs_sample(10000, lo, hi, 17);
    double mx = 0, my = 0;
    for (const auto& p : pts) {
        mx += p[0];
        my += p[1];
    }
    mx /= pts.size();
    my /= pts.size();
    EXPECT_NEAR(mx, 1.0, 0.02 * 2.0);
    EXPECT_NEAR(my, 4.0, 0.02 * 4.0);
}

TEST(Refine, FractionZeroReturnsInputUnchanged) {
    auto g = quarter_plate();
    std::vector<std::array<double, 3>> pts{{0.3, 0.3, 0.0}, {0.4, 0.2, 0.0}};
    geom::FeatureLocus f{geom::FeatureLocus::Kind::circle, 0, 0, 0.1};
    auto out = geom::refine_near(pts, g, f, 0.0, 0.05, 0, 0, 1);
    EXPECT_EQ(out.size(), pts.size());
}

TEST(Refine, TargetFractionReached) {
    auto g = quarter_plate();
    geom::CollocationConfig cc;
    cc.interior = 500;
    auto set = geom::build_collocation(g, {}, {}, cc, 11);
    geom::FeatureLocus f{geom::FeatureLocus::Kind::circle, 0, 0, 0.1};
    auto out = geom::refine_near(set.interior, g, f, 0.3, 0.05, 0, 0, 2);
    const auto near = std::count_if(out.begin(), out.end(), [&](const auto& p) {
        return f.distance(p[0], p[1]) <= 0.05;
    });
    EXPECT_GE(static_cast<double>(near) / out.size(), 0.3);
    for (const auto& p : out) EXPECT_TRUE(g.inside(p[0], p[1]));
}

TEST(Refine, InfeasibleFractionRejected) {
    auto g = quarter_plate();
    std::vector<std::array<double, 3>> pts{{0.3, 0.3, 0.0}};
    geom::FeatureLocus f{geom::FeatureLocus::Kind::circle, 0, 0, 0.1};
    EXPECT_THROW(geom::refine_near(pts, g, f, 1.0, 0.05, 0, 0, 1), geom::ConfigError);
    EXPECT_THROW(geom::refine_near(pts, g, f, 0.5, -1, 0, 0, 1), geom::ConfigError);
}

TEST(Collocation, StaticPlateCountsHonored) {
    auto g = quarter_plate();
    auto segs = quarter_plate_segments();
    geom::CollocationConfig cc;
    cc.interior = 25000;
    cc.per_segment = {50, 50, 100, 100, 160};
    cc.extra_segments = {4};
    auto set = geom::build_collocation(g, segs, {}, cc, 21);
    EXPECT_EQ(set.interior.size(), 25000u);
    EXPECT_EQ(set.extra.size(), 160u);  // notch condition points
    for (const auto& p : set.interior) EXPECT_TRUE(g.inside(p[0], p[1]));
}

TEST(Collocation, DynamicPlateCountsHonored) {
    auto g = quarter_plate();
    auto segs = quarter_plate_segments();
    geom::CollocationConfig cc;
    cc.interior = 120000;
    cc.per_segment = {100, 100, 100, 100, 9600};
    cc.extra_segments = {4};
    cc.t0 = 0;
    cc.t1 = 10;
    cc.initial = 500;
    auto set = geom::build_collocation(g, segs, {}, cc, 22);
    EXPECT_EQ(set.interior.size(), 120000u);
    EXPECT_EQ(set.extra.size(), 9600u);
    EXPECT_EQ(set.initial.size(), 500u);
    for (const auto& p : set.initial) EXPECT_TRUE(g.inside(p.x, p.y));
}

TEST(Collocation, ZeroNeumannSegmentsGiveEmptyNeumannSet) {
    geom::Geometry g{geom::DomainVariant::rectangle, 0, 1, 0, 1};
    geom::BoundarySegment bottom{"bottom", EdgeId::bottom, SegmentKind::dirichlet, 0, 1, {}};
    std::vector<geom::BoundarySegment> segs{bottom};
    geom::CollocationConfig cc;
    cc.interior = 10;
    cc.per_segment = {8};
    auto set = geom::build_collocation(g, segs, {}, cc, 1);
    EXPECT_EQ(set.n_neumann(), 0u);
    EXPECT_EQ(set.n_dirichlet(), 8u);
}

TEST(Collocation, BoundaryAttachmentsConsistent) {
    auto g = quarter_plate();
    auto segs = quarter_plate_segments();
    geom::CollocationConfig cc;
    cc.interior = 10;
    cc.per_segment = {20, 20, 20, 20, 40};
    auto set = geom::build_collocation(g, segs, {}, cc, 31);
    for (const auto& b : set.boundary) {
        // normals are unit
        EXPECT_NEAR(b.nx * b.nx + b.ny * b.ny, 1.0, 1e-12);
        const auto& seg = segs[b.segment];
        if (seg.edge == EdgeId::hole) {
            // on the circle within 1e-12, normal towards the centre
            const double r = std::hypot(b.x - g.hole_cx, b.y - g.hole_cy);
            EXPECT_NEAR(r, g.hole_r, 1e-12);
            EXPECT_NEAR(b.nx, (g.hole_cx - b.x) / g.hole_r, 1e-12);
            EXPECT_NEAR(b.ny, (g.hole_cy - b.y) / g.hole_r, 1e-12);
        } else if (seg.edge == EdgeId::right) {
            EXPECT_NEAR(b.x, g.x1, 1e-12);
            // prescribed normal traction T = 1 on the right edge
            EXPECT_NEAR(b.trac[0], 1.0, 1e-12);
            EXPECT_NEAR(b.trac[1], 0.0, 1e-12);
        }
    }
}

// --- distance targets -----------------------------------------------------

TEST(Distance, ZeroOnConstrainedBoundary) {
    geom::Geometry g{geom::DomainVariant::rectangle, 0, 1, 0, 1};
    geom::SpaceTimeBox box = geom::SpaceTimeBox::of(g, 0, 0);
    geom::ChannelSurfaces map;
    geom::Surface s;
    s.kind = geom::Surface::Kind::edge_segment;
    s.edge = EdgeId::left;
    s.a0 = 0;
    s.a1 = 1;
    map.surfaces[geom::ch_u].push_back(s);
    auto d = geom::distance_targets(0.0, 0.37, 0.0, map, box);
    EXPECT_EQ(d[geom::ch_u], 0.0);
    EXPECT_EQ(d[geom::ch_v], 1.0);  // unconstrained sentinel
}

TEST(Distance, UnitSquareAllEdgesCentreIsHalf) {
    geom::Geometry g{geom::DomainVariant::rectangle, 0, 1, 0, 1};
    geom::SpaceTimeBox box = geom::SpaceTimeBox::of(g, 0, 0);
    geom::ChannelSurfaces map;
    for (auto e : {EdgeId::left, EdgeId::right, EdgeId::bottom, EdgeId::top}) {
        geom::Surface s;
        s.kind = geom::Surface::Kind::edge_segment;
        s.edge = e;
        s.a0 = 0;
        s.a1 = 1;
        map.surfaces[geom::ch_u].push_back(s);
    }
    auto d = geom::distance_targets(0.5, 0.5, 0.0, map, box);
    EXPECT_DOUBLE_EQ(d[geom::ch_u], 0.5);
}

// Brute-force oracle: dense boundary sampling.
TEST(Distance, QuarterPlateTargetsMatchDenseSampling) {
    auto g = quarter_plate();
    auto segs = quarter_plate_segments();
    geom::SpaceTimeBox box = geom::SpaceTimeBox::of(g, 0, 0);
    auto hm = geom::derive_hard_map(g, segs, false);
    // u is pinned on the symmetry edge x = 0 (y in [0.1, 0.5])
    ASSERT_FALSE(hm.map.surfaces[geom::ch_u].empty());

    // dense sample of that segment
    std::vector<std::array<double, 2>> dense;
    for (int i = 0; i < 100000; ++i) {
        const double y = 0.1 + 0.4 * (i + 0.5) / 100000.0;
        dense.push_back({0.0, y});
    }
    Rng rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        const double x = rng.uniform(0, 0.5), y = rng.uniform(0, 0.5);
        if (!g.inside(x, y)) continue;
        auto d = geom::distance_targets(x, y, 0.0, hm.map, box);
        double brute = 1e300;
        for (const auto& q : dense) {
            const double ddx = box.nx(x) - box.nx(q[0]);
            const double ddy = box.ny(y) - box.ny(q[1]);
            brute = std::min(brute, std::hypot(ddx, ddy));
        }
        EXPECT_NEAR(d[geom::ch_u], brute, 1e-3);
    }
}

TEST(Distance, LipschitzInNormalizedCoordinates) {
    auto g = quarter_plate();
    auto segs = quarter_plate_segments();
    geom::SpaceTimeBox box = geom::SpaceTimeBox::of(g, 0, 0);
    auto hm = geom::derive_hard_map(g, segs, false);
    Rng rng(9);
    for (int trial = 0; trial < 500; ++trial) {
        const double x1 = rng.uniform(0, 0.5), y1 = rng.uniform(0, 0.5);
        const double x2 = rng.uniform(0, 0.5), y2 = rng.uniform(0, 0.5);
        auto d1 = geom::distance_targets(x1, y1, 0.0, hm.map, box);
        auto d2 = geom::distance_targets(x2, y2, 0.0, hm.map, box);
        const double dist = std::hypot(box.nx(x1) - box.nx(x2), box.ny(y1) - box.ny(y2));
        for (int c = 0; c < geom::kChannels; ++c)
            if (!hm.map.surfaces[c].empty())
                EXPECT_LE(std::abs(d1[c] - d2[c]), dist + 1e-12);
    }
}

// --- analytic distance fields -----------------------------------------------

TEST(AnalyticDistance, ExactZerosOnSurfacesPositiveInside) {
    auto g = quarter_plate();
    auto segs = quarter_plate_segments();
    auto hm = geom::derive_hard_map(g, segs, false);
    geom::AnalyticDistance ad_field;
    ad_field.box = geom::SpaceTimeBox::of(g, 0, 0);
    ad_field.map = hm.map;
    ad_field.calibrate(g);

    // u pinned at x = 0: the factor vanishes bitwise on that edge
    const double d_edge =
        ad_field.eval_channel<double>(geom::ch_u, ad_field.box.nx(0.0), ad_field.box.ny(0.3), 0.0);
    EXPECT_EQ(d_edge, 0.0);
    // positive strictly inside
    const double d_in =
        ad_field.eval_channel<double>(geom::ch_u, ad_field.box.nx(0.3), ad_field.box.ny(0.3), 0.0);
    EXPECT_GT(d_in, 0.0);
    EXPECT_LE(d_in, 1.0 + 1e-12);
}

TEST(AnalyticDistance, TimeFactorHasZeroVelocityAtStart) {
    geom::Geometry g{geom::DomainVariant::rectangle, 0, 1, 0, 1};
    geom::BoundarySegment all{"edges", EdgeId::left, SegmentKind::dirichlet, 0, 1, {}};
    std::vector<geom::BoundarySegment> segs{all};
    auto hm = geom::derive_hard_map(g, segs, true);
    geom::AnalyticDistance adf;
    adf.box = geom::SpaceTimeBox::of(g, 0, 2.0);
    adf.map = hm.map;
    adf.calibrate(g);

    // dD/dt at t = 0 via a dual pass
    using D = ad::Dual<double, 1>;
    const D xh{0.5, {0.0}}, yh{0.5, {0.0}}, th{0.0, {1.0}};
    const D val = adf.eval_channel<D>(geom::ch_u, xh, yh, th);
    EXPECT_EQ(val.v, 0.0);
    EXPECT_EQ(val.d[0], 0.0);
    // and D itself vanishes on the t = 0 plane everywhere
    EXPECT_EQ(adf.eval_channel<double>(geom::ch_u, 0.3, 0.9, 0.0), 0.0);
}
