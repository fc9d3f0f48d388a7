#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "pinnelast/ad/dual.hpp"
#include "pinnelast/geom/geometry.hpp"
#include "pinnelast/geom/sampling.hpp"

namespace pinnelast::geom {

enum Channel : int { ch_u = 0, ch_v = 1, ch_s11 = 2, ch_s22 = 3, ch_s12 = 4 };
inline constexpr int kChannels = 5;

/// Affine map from the physical spacetime box onto the unit hypercube; all
/// distance computations happen in these coordinates.
struct SpaceTimeBox {
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1, t0 = 0, t1 = 0;
    bool dynamic = false;

    double nx(double x) const { return (x - x0) / (x1 - x0); }
    double ny(double y) const { return (y - y0) / (y1 - y0); }
    double nt(double t) const { return dynamic ? (t - t0) / (t1 - t0) : 0.0; }

    bool isotropic_xy() const { return std::abs((x1 - x0) - (y1 - y0)) < 1e-12 * (x1 - x0); }

    static SpaceTimeBox of(const Geometry& g, double t0, double t1) {
        return SpaceTimeBox{g.x0, g.x1, g.y0, g.y1, t0, t1, t1 > t0};
    }
};

/// A spacetime surface on which one solution channel is pinned.
/// Edge/circle surfaces extend over all time; time0 spans the whole domain.
struct Surface {
    enum class Kind { edge_segment, circle, time0 };
    Kind kind = Kind::edge_segment;
    EdgeId edge = EdgeId::left;
    double a0 = 0, a1 = 0;  // physical range along the edge (or angle range)
    double cx = 0, cy = 0, r = 0;

    static Surface from_segment(const Geometry& g, const BoundarySegment& s) {
        Surface f;
        if (s.edge == EdgeId::hole) {
            f.kind = Kind::circle;
            f.cx = g.hole_cx;
            f.cy = g.hole_cy;
            f.r = g.hole_r;
            f.a0 = s.a0;
            f.a1 = s.a1;
        } else {
            f.kind = Kind::edge_segment;
            f.edge = s.edge;
            f.a0 = s.a0;
            f.a1 = s.a1;
        }
        return f;
    }

    static Surface time_plane() {
        Surface f;
        f.kind = Kind::time0;
        return f;
    }
};

namespace detail_dist {

inline double clamp_excess(double v, double lo, double hi) {
    if (v < lo) return lo - v;
    if (v > hi) return v - hi;
    return 0.0;
}

/// Exact distance from a normalized point to one surface.
inline double surface_distance(const Surface& s, const SpaceTimeBox& box, double xh, double yh,
                               double th) {
    switch (s.kind) {
        case Surface::Kind::time0: return th;
        case Surface::Kind::edge_segment: {
            double d_perp = 0, along = 0, lo = 0, hi = 1;
            switch (s.edge) {
                case EdgeId::left: d_perp = xh - 0.0, along = yh, lo = box.ny(s.a0), hi = box.ny(s.a1); break;
                case EdgeId::right: d_perp = 1.0 - xh, along = yh, lo = box.ny(s.a0), hi = box.ny(s.a1); break;
                case EdgeId::bottom: d_perp = yh - 0.0, along = xh, lo = box.nx(s.a0), hi = box.nx(s.a1); break;
                case EdgeId::top: d_perp = 1.0 - yh, along = xh, lo = box.nx(s.a0), hi = box.nx(s.a1); break;
                case EdgeId::hole: break;
            }
            if (lo > hi) std::swap(lo, hi);
            const double ex = clamp_excess(along, lo, hi);
            return std::hypot(d_perp, ex);
        }
        case Surface::Kind::circle: {
            // assumes isotropic x/y normalization (checked by the caller)
            const double sc = 1.0 / (box.x1 - box.x0);
            const double cxn = box.nx(s.cx), cyn = box.ny(s.cy);
            const double rn = s.r * sc;
            const double dx = xh - cxn, dy = yh - cyn;
            const double rho = std::hypot(dx, dy);
            const double th_p = std::atan2(dy, dx);
            // clamp to the arc range
            double lo = s.a0, hi = s.a1;
            if (hi - lo >= 2 * M_PI - 1e-12) return std::abs(rho - rn);
            double ang = th_p;
            while (ang < lo) ang += 2 * M_PI;
            while (ang > hi + 2 * M_PI) ang -= 2 * M_PI;
            if (ang >= lo && ang <= hi) return std::abs(rho - rn);
            const auto end_dist = [&](double a) {
                const double ex = cxn + rn * std::cos(a), ey = cyn + rn * std::sin(a);
                return std::hypot(xh - ex, yh - ey);
            };
            return std::min(end_dist(lo), end_dist(hi));
        }
    }
    return 1.0;
}

/// Dense sampling fallback (anisotropic boxes): min distance over sampled
/// surface points in normalized coordinates.
inline double surface_distance_sampled(const Surface& s, const SpaceTimeBox& box, double xh,
                                       double yh, double th, int samples = 10000) {
    if (s.kind == Surface::Kind::time0) return th;
    double best = 1e300;
    for (int i = 0; i < samples; ++i) {
        const double u = (i + 0.5) / samples;
        double px, py;
        if (s.kind == Surface::Kind::circle) {
            const double a = s.a0 + (s.a1 - s.a0) * u;
            px = s.cx + s.r * std::cos(a);
            py = s.cy + s.r * std::sin(a);
        } else {
            const double a = s.a0 + (s.a1 - s.a0) * u;
            switch (s.edge) {
                case EdgeId::left: px = box.x0, py = a; break;
                case EdgeId::right: px = box.x1, py = a; break;
                case EdgeId::bottom: px = a, py = box.y0; break;
                case EdgeId::top: px = a, py = box.y1; break;
                default: px = a, py = a; break;
            }
        }
        const double dx = xh - box.nx(px), dy = yh - box.ny(py);
        best = std::min(best, dx * dx + dy * dy);
    }
    return std::sqrt(best);
}

}  // namespace detail_dist

/// Per-channel pinned-surface lists (the per-variable boundary map).
struct ChannelSurfaces {
    std::array<std::vector<Surface>, kChannels> surfaces;

    bool constrained(int ch) const { return !surfaces[ch].empty(); }
};

/// Exact minimum distance (normalized coordinates) from a point to each
/// channel's pinned surfaces; channels with no surface get the sentinel 1.
inline std::array<double, kChannels> distance_targets(double x, double y, double t,
                                                      const ChannelSurfaces& map,
                                                      const SpaceTimeBox& box) {
    std::array<double, kChannels> out;
    const double xh = box.nx(x), yh = box.ny(y), th = box.nt(t);
    for (int c = 0; c < kChannels; ++c) {
        if (map.surfaces[c].empty()) {
            out[c] = 1.0;
            continue;
        }
        double best = 1e300;
        for (const auto& s : map.surfaces[c]) {
            const double d = (s.kind == Surface::Kind::circle && !box.isotropic_xy())
                                 ? detail_dist::surface_distance_sampled(s, box, xh, yh, th)
                                 : detail_dist::surface_distance(s, box, xh, yh, th);
            best = std::min(best, d);
        }
        out[c] = best;
    }
    return out;
}

/// Smooth closed-form distance fields for hard enforcement: per channel the
/// product of per-surface factors, each vanishing exactly on its surface and
/// positive inside the domain. Edge factors are linear, circles quadratic
/// ((rho^2 - r^2), linear near the surface), and the initial-time factor is
/// t^2 so the composed solution has zero velocity sensitivity at t = 0.
/// Channel values are rescaled to peak near 1.
struct AnalyticDistance {
    SpaceTimeBox box;
    ChannelSurfaces map;
    std::array<double, kChannels> scale{1, 1, 1, 1, 1};

    template <class S>
    S factor(const Surface& s, const S& xh, const S& yh, const S& th) const {
        using ad::primal_value;
        switch (s.kind) {
            case Surface::Kind::time0: return th * th;
            case Surface::Kind::edge_segment: {
                S d_perp = [&] {
                    switch (s.edge) {
                        case EdgeId::left: return xh * 1.0;
                        case EdgeId::right: return 1.0 - xh;
                        case EdgeId::bottom: return yh * 1.0;
                        case EdgeId::top: return 1.0 - yh;
                        default: return xh * 0.0;
                    }
                }();
                const bool horizontal = s.edge == EdgeId::bottom || s.edge == EdgeId::top;
                const double lo = horizontal ? box.nx(std::min(s.a0, s.a1)) : box.ny(std::min(s.a0, s.a1));
                const double hi = horizontal ? box.nx(std::max(s.a0, s.a1)) : box.ny(std::max(s.a0, s.a1));
                if (lo <= 1e-12 && hi >= 1.0 - 1e-12) return d_perp;  // full edge
                const S along = horizontal ? xh : yh;
                const double av = primal_value(along);
                S ex = ad::from_const<S>(0.0);
                if (av < lo) ex = lo - along;
                else if (av > hi) ex = along - hi;
                return d_perp + ex;
            }
            case Surface::Kind::circle: {
                const double sc = 1.0 / (box.x1 - box.x0);
                const double cxn = box.nx(s.cx), cyn = box.ny(s.cy);
                const double rn = s.r * sc;
                const S dx = xh - cxn, dy = yh - cyn;
                return dx * dx + dy * dy - rn * rn;
            }
        }
        return ad::from_const<S>(1.0);
    }

    /// Harmonic combination of the per-surface factors: behaves like the
    /// smallest factor near each surface (unit-slope vanishing, so the
    /// trainable factor keeps a uniform scale) yet stays smooth inside.
    /// Evaluated in product form so single zeros never divide by zero.
    template <class S>
    S eval_channel(int ch, const S& xh, const S& yh, const S& th) const {
        const auto& surfs = map.surfaces[ch];
        if (surfs.empty()) return ad::from_const<S>(1.0);
        if (surfs.size() == 1)
            return ad::from_const<S>(scale[ch]) * factor(surfs[0], xh, yh, th);
        std::vector<S> d(surfs.size());
        for (std::size_t i = 0; i < surfs.size(); ++i) d[i] = factor(surfs[i], xh, yh, th);
        // numerator: prod(d_i); denominator: sum_k prod_{i != k} d_i
        S num = d[0];
        for (std::size_t i = 1; i < d.size(); ++i) num = num * d[i];
        S den = ad::zero_of<S>();
        for (std::size_t k = 0; k < d.size(); ++k) {
            S p = ad::from_const<S>(1.0);
            for (std::size_t i = 0; i < d.size(); ++i)
                if (i != k) p = p * d[i];
            den = den + p;
        }
        return ad::from_const<S>(scale[ch]) * (num / (den + 1e-30));
    }

    /// Calibrates per-channel scales so the product peaks near 1.
    void calibrate(const Geometry& g) {
        const int nx = 21, ny = 21, nt = box.dynamic ? 9 : 1;
        for (int c = 0; c < kChannels; ++c) {
            scale[c] = 1.0;
            if (map.surfaces[c].empty()) continue;
            double mx = 0;
            for (int i = 0; i < nx; ++i)
                for (int j = 0; j < ny; ++j)
                    for (int k = 0; k < nt; ++k) {
                        const double x = box.x0 + (box.x1 - box.x0) * (i + 0.5) / nx;
                        const double y = box.y0 + (box.y1 - box.y0) * (j + 0.5) / ny;
                        const double t =
                            box.dynamic ? box.t0 + (box.t1 - box.t0) * (k + 0.5) / nt : 0.0;
                        if (!g.inside(x, y)) continue;
                        mx = std::max(mx, eval_channel<double>(c, box.nx(x), box.ny(y),
                                                               box.nt(t)));
                    }
            if (mx > 0) scale[c] = 1.0 / mx;
        }
    }
};

/// Derives the per-channel pinned-surface map from the segment list.
/// Axis-aligned traction segments pin the stress channels that form the
/// traction on that edge; circle segments with prescribed displacement pin
/// u and v; circle tractions cannot be pinned channel-wise and are left to
/// the equation-side extra set. Dynamic problems pin u and v (optionally the
/// stress channels) on the t = 0 plane.
struct HardMapResult {
    ChannelSurfaces map;
    std::vector<int> soft_extra_segments;  // segment indices that stay equation-side
};

inline HardMapResult derive_hard_map(const Geometry& g,
                                     std::span<const BoundarySegment> segments, bool dynamic,
                                     bool pin_stress_at_t0 = false) {
    HardMapResult out;
    for (std::size_t si = 0; si < segments.size(); ++si) {
        const auto& seg = segments[si];
        const auto cond = segment_condition(seg);
        const Surface surf = Surface::from_segment(g, seg);
        if (cond.dir_mask & 1u) out.map.surfaces[ch_u].push_back(surf);
        if (cond.dir_mask & 2u) out.map.surfaces[ch_v].push_back(surf);
        if (cond.trac_mask) {
            if (seg.edge == EdgeId::hole) {
                out.soft_extra_segments.push_back(static_cast<int>(si));
                continue;
            }
            const bool x_edge = seg.edge == EdgeId::left || seg.edge == EdgeId::right;
            if (cond.trac_mask & 1u)
                out.map.surfaces[x_edge ? ch_s11 : ch_s12].push_back(surf);
            if (cond.trac_mask & 2u)
                out.map.surfaces[x_edge ? ch_s12 : ch_s22].push_back(surf);
        }
    }
    if (dynamic) {
        const Surface t0 = Surface::time_plane();
        out.map.surfaces[ch_u].push_back(t0);
        out.map.surfaces[ch_v].push_back(t0);
        if (pin_stress_at_t0) {
            out.map.surfaces[ch_s11].push_back(t0);
            out.map.surfaces[ch_s22].push_back(t0);
            out.map.surfaces[ch_s12].push_back(t0);
        }
    }
    (void)g;
    return out;
}

}  // namespace pinnelast::geom
