#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "pinnelast/geom/geometry.hpp"
#include "pinnelast/rng.hpp"

namespace pinnelast::geom {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Latin hypercube sample: n points in a d-dimensional box, one point per
/// stratum per axis, seeded-deterministic.
inline std::vector<std::vector<double>> lhs_sample(int n, std::span<const double> lo,
                                                   std::span<const double> hi,
                                                   std::uint64_t seed) {
    if (n < 1) throw ConfigError("lhs_sample: n must be >= 1");
    const std::size_t d = lo.size();
    for (std::size_t a = 0; a < d; ++a)
        if (!(hi[a] > lo[a])) throw ConfigError("lhs_sample: degenerate box");
    Rng rng(seed);
    std::vector<std::vector<double>> pts(n, std::vector<double>(d));
    std::vector<int> perm(n);
    for (std::size_t a = 0; a < d; ++a) {
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = n - 1; i > 0; --i)
            std::swap(perm[i], perm[static_cast<int>(rng.index(i + 1))]);
        const double w = (hi[a] - lo[a]) / n;
        for (int i = 0; i < n; ++i)
            pts[i][a] = lo[a] + (perm[i] + rng.uniform()) * w;
    }
    return pts;
}

/// Feature locus for residual-point refinement.
struct FeatureLocus {
    enum class Kind { circle, point };
    Kind kind = Kind::circle;
    double cx = 0, cy = 0, r = 0;

    double distance(double x, double y) const {
        const double d = std::hypot(x - cx, y - cy);
        return kind == Kind::circle ? std::abs(d - r) : d;
    }
};

/// Adds domain points near the feature until at least `fraction` of the set
/// lies within `band` of it. Existing points are kept.
inline std::vector<std::array<double, 3>> refine_near(std::vector<std::array<double, 3>> pts,
                                                      const Geometry& g,
                                                      const FeatureLocus& feature,
                                                      double fraction, double band,
                                                      double t_lo, double t_hi,
                                                      std::uint64_t seed) {
    if (fraction <= 0.0) return pts;
    if (fraction >= 1.0) throw ConfigError("refine_near: fraction must be < 1");
    if (!(band > 0)) throw ConfigError("refine_near: band must be positive");
    const auto near = [&](const std::array<double, 3>& p) {
        return feature.distance(p[0], p[1]) <= band;
    };
    std::size_t n_near = static_cast<std::size_t>(std::count_if(pts.begin(), pts.end(), near));
    const std::size_t n = pts.size();
    if (n_near >= static_cast<std::size_t>(std::ceil(fraction * n))) return pts;
    const std::size_t k = static_cast<std::size_t>(
        std::ceil((fraction * n - static_cast<double>(n_near)) / (1.0 - fraction)));

    Rng rng(seed);
    const bool dynamic = t_hi > t_lo;
    std::size_t added = 0, attempts = 0;
    const std::size_t max_attempts = 20000 * (k + 1);
    while (added < k) {
        if (++attempts > max_attempts)
            throw ConfigError("refine_near: refinement band infeasible for this geometry");
        const double x = rng.uniform(std::max(g.x0, feature.cx - feature.r - band),
                                     std::min(g.x1, feature.cx + feature.r + band));
        const double y = rng.uniform(std::max(g.y0, feature.cy - feature.r - band),
                                     std::min(g.y1, feature.cy + feature.r + band));
        if (!g.inside(x, y)) continue;
        if (feature.distance(x, y) > band) continue;
        const double t = dynamic ? rng.uniform(t_lo, t_hi) : t_lo;
        pts.push_back({x, y, t});
        ++added;
    }
    return pts;
}

/// One boundary collocation point with its attachments.
struct BcPoint {
    double x = 0, y = 0, t = 0;
    double nx = 0, ny = 0;
    std::array<double, 2> dir{0, 0};   // prescribed displacement components
    std::array<double, 2> trac{0, 0};  // prescribed traction components
    unsigned dir_mask = 0, trac_mask = 0;
    int segment = -1;
};

struct IcPoint {
    double x = 0, y = 0;
    std::array<double, 2> u0{0, 0};
    std::array<double, 2> v0{0, 0};
};

/// The collocation sets: interior (equation residuals), boundary
/// (Dirichlet/Neumann, mask-tagged), extra traction surfaces that stay as
/// equation-side conditions (hole), and initial-state points.
struct CollocationSet {
    std::vector<std::array<double, 3>> interior;
    std::vector<BcPoint> boundary;
    std::vector<BcPoint> extra;
    std::vector<IcPoint> initial;

    std::size_t n_dirichlet() const {
        std::size_t n = 0;
        for (const auto& p : boundary) n += p.dir_mask != 0;
        return n;
    }
    std::size_t n_neumann() const {
        std::size_t n = 0;
        for (const auto& p : boundary) n += p.trac_mask != 0;
        return n;
    }
};

struct CollocationConfig {
    int interior = 1000;
    std::vector<int> per_segment;  // aligned with the segment list
    int initial = 0;
    double t0 = 0, t1 = 0;  // t1 > t0 marks a dynamic problem
    double refine_fraction = 0, refine_band = 0;
    std::vector<int> extra_segments;  // segment indices whose points go to `extra`
};

inline bool is_extra_segment(const CollocationConfig& cfg, int idx) {
    return std::find(cfg.extra_segments.begin(), cfg.extra_segments.end(), idx) !=
           cfg.extra_segments.end();
}

/// Samples every set. Interior points honor the inside-domain predicate
/// exactly (rejection over fresh LHS batches); boundary points are stratified
/// along each segment's parameter (and time, when dynamic).
inline CollocationSet build_collocation(const Geometry& g,
                                        std::span<const BoundarySegment> segments,
                                        const InitialCondition& ic,
                                        const CollocationConfig& cfg, std::uint64_t seed) {
    g.validate();
    if (cfg.interior < 1) throw ConfigError("collocation: interior count must be >= 1");
    if (!cfg.per_segment.empty() && cfg.per_segment.size() != segments.size())
        throw ConfigError("collocation: per-segment counts do not match the segment list");
    const bool dynamic = cfg.t1 > cfg.t0;
    Rng rng(seed);

    CollocationSet set;
    set.interior.reserve(cfg.interior);
    {
        std::vector<double> lo{g.x0, g.y0}, hi{g.x1, g.y1};
        if (dynamic) {
            lo.push_back(cfg.t0);
            hi.push_back(cfg.t1);
        }
        while (static_cast<int>(set.interior.size()) < cfg.interior) {
            const int want = cfg.interior - static_cast<int>(set.interior.size());
            const int batch = std::max(64, want + want / 3);
            auto pts = lhs_sample(batch, lo, hi, rng.raw());
            for (const auto& p : pts) {
                if (!g.inside(p[0], p[1])) continue;
                set.interior.push_back({p[0], p[1], dynamic ? p[2] : 0.0});
                if (static_cast<int>(set.interior.size()) == cfg.interior) break;
            }
        }
    }
    if (cfg.refine_fraction > 0) {
        if (g.variant == DomainVariant::rectangle)
            throw ConfigError("collocation: refinement requested without a feature");
        FeatureLocus f{FeatureLocus::Kind::circle, g.hole_cx, g.hole_cy, g.hole_r};
        set.interior = refine_near(std::move(set.interior), g, f, cfg.refine_fraction,
                                   cfg.refine_band, cfg.t0, dynamic ? cfg.t1 : cfg.t0,
                                   rng.raw());
    }

    for (std::size_t si = 0; si < segments.size(); ++si) {
        const auto& seg = segments[si];
        const int count = cfg.per_segment.empty() ? 0 : cfg.per_segment[si];
        if (count <= 0) continue;
        const auto cond = segment_condition(seg);
        if (cond.dir_mask == 0 && cond.trac_mask == 0) continue;

        std::vector<std::vector<double>> params;
        if (dynamic) {
            std::array<double, 2> lo{0.0, cfg.t0}, hi{1.0, cfg.t1};
            params = lhs_sample(count, lo, hi, rng.raw());
        } else {
            std::array<double, 1> lo{0.0}, hi{1.0};
            params = lhs_sample(count, lo, hi, rng.raw());
        }
        for (const auto& pr : params) {
            BcPoint p;
            const double s = pr[0];
            p.t = dynamic ? pr[1] : 0.0;
            const auto xy = seg.at(g, s);
            const auto n = seg.normal(g, s);
            p.x = xy[0];
            p.y = xy[1];
            p.nx = n[0];
            p.ny = n[1];
            p.dir_mask = cond.dir_mask;
            p.trac_mask = cond.trac_mask;
            p.segment = static_cast<int>(si);
            const auto val = seg.value.eval(p.x, p.y, p.t, p.nx, p.ny);
            if (seg.kind == SegmentKind::dirichlet) p.dir = val;
            if (seg.kind == SegmentKind::neumann) p.trac = val;
            // symmetry and traction-free conditions prescribe zeros
            (is_extra_segment(cfg, static_cast<int>(si)) ? set.extra : set.boundary)
                .push_back(p);
        }
    }

    if (cfg.initial > 0) {
        if (!dynamic) throw ConfigError("collocation: initial points on a static problem");
        std::array<double, 2> lo{g.x0, g.y0}, hi{g.x1, g.y1};
        std::vector<IcPoint> ini;
        while (static_cast<int>(ini.size()) < cfg.initial) {
            const int want = cfg.initial - static_cast<int>(ini.size());
            auto pts = lhs_sample(std::max(64, want + want / 3), lo, hi, rng.raw());
            for (const auto& p : pts) {
                if (!g.inside(p[0], p[1])) continue;
                ini.push_back(IcPoint{p[0], p[1], ic.displacement, ic.velocity});
                if (static_cast<int>(ini.size()) == cfg.initial) break;
            }
        }
        set.initial = std::move(ini);
    }
    return set;
}

}  // namespace pinnelast::geom
