#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "pinnelast/oracle/analytic.hpp"
#include "pinnelast/oracle/sources.hpp"

namespace pinnelast::geom {

struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class DomainVariant { rectangle, rect_corner_hole, rect_center_hole };

/// Rectangle with an optional circular cut-out (quarter hole at a corner or
/// a full hole/source circle in the interior).
struct Geometry {
    DomainVariant variant = DomainVariant::rectangle;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    double hole_cx = 0, hole_cy = 0, hole_r = 0;

    void validate() const {
        if (!(x1 > x0 && y1 > y0)) throw GeometryError("geometry: degenerate bounding box");
        if (variant != DomainVariant::rectangle) {
            if (!(hole_r > 0)) throw GeometryError("geometry: hole radius must be positive");
            const bool cx_in = hole_cx >= x0 && hole_cx <= x1;
            const bool cy_in = hole_cy >= y0 && hole_cy <= y1;
            if (!cx_in || !cy_in)
                throw GeometryError("geometry: hole centre outside the bounding box");
        }
    }

    bool inside(double x, double y) const {
        if (x < x0 || x > x1 || y < y0 || y > y1) return false;
        if (variant == DomainVariant::rectangle) return true;
        const double dx = x - hole_cx, dy = y - hole_cy;
        return dx * dx + dy * dy >= hole_r * hole_r;
    }
};

enum class EdgeId { left, right, bottom, top, hole };

enum class SegmentKind {
    dirichlet,       // displacement vector prescribed
    neumann,         // traction vector prescribed
    traction_free,   // traction = 0
    symmetry_x,      // edge x = const: u = 0 and shear traction = 0
    symmetry_y,      // edge y = const: v = 0 and shear traction = 0
    free_edge,       // unconstrained (truncation boundary)
};

/// Prescribed boundary value as a function of position, time and normal.
/// Covers every load the shipped problems use.
struct ValueFn {
    enum class Kind {
        zero,
        const_vec,        // fixed (vx, vy)
        traction_normal,  // amp * n (constant normal traction)
        cyclic_normal,    // [amp sin(2 pi t / period + 1.5 pi) + amp] * n
        radial_pulse,     // source_profile(t) * rhat from (cx, cy)
        kirsch_traction,  // traction of the Kirsch field across the boundary
    };
    Kind kind = Kind::zero;
    std::array<double, 2> vec{0, 0};
    double amp = 0, period = 1;
    oracle::SourceKind pulse = oracle::SourceKind::gaussian;
    double U0 = 0, ts = 0, tp = 1;
    double cx = 0, cy = 0;
    double kirsch_T = 0, kirsch_a = 0, E = 1, nu = 0.3;

    std::array<double, 2> eval(double x, double y, double t, double nx, double ny) const {
        switch (kind) {
            case Kind::zero: return {0.0, 0.0};
            case Kind::const_vec: return {vec[0], vec[1]};
            case Kind::traction_normal: return {amp * nx, amp * ny};
            case Kind::cyclic_normal: {
                const double a =
                    amp * std::sin(2 * M_PI * t / period + 1.5 * M_PI) + amp;
                return {a * nx, a * ny};
            }
            case Kind::radial_pulse: {
                const double rx = x - cx, ry = y - cy;
                const double r = std::sqrt(rx * rx + ry * ry);
                const double p = oracle::source_profile(pulse, t, U0, ts, tp);
                if (r < 1e-300) return {0.0, 0.0};
                return {p * rx / r, p * ry / r};
            }
            case Kind::kirsch_traction: {
                double tx, ty;
                oracle::kirsch_traction(x, y, kirsch_T, kirsch_a, E, nu, nx, ny, tx, ty);
                return {tx, ty};
            }
        }
        return {0.0, 0.0};
    }
};

/// One boundary piece: a sub-range of a box edge or of the hole circle, its
/// condition kind, and prescribed values. For edges the range [a0, a1] runs
/// along the edge coordinate (y for left/right, x for bottom/top); for the
/// hole it is an angle range in radians.
struct BoundarySegment {
    std::string name;
    EdgeId edge = EdgeId::left;
    SegmentKind kind = SegmentKind::traction_free;
    double a0 = 0, a1 = 1;
    ValueFn value;  // Dirichlet displacement or Neumann traction, by kind

    /// Point on the segment at parameter s in [0, 1].
    std::array<double, 2> at(const Geometry& g, double s) const {
        const double a = a0 + (a1 - a0) * s;
        switch (edge) {
            case EdgeId::left: return {g.x0, a};
            case EdgeId::right: return {g.x1, a};
            case EdgeId::bottom: return {a, g.y0};
            case EdgeId::top: return {a, g.y1};
            case EdgeId::hole:
                return {g.hole_cx + g.hole_r * std::cos(a), g.hole_cy + g.hole_r * std::sin(a)};
        }
        return {0, 0};
    }

    /// Outward unit normal of the material domain at parameter s.
    std::array<double, 2> normal(const Geometry& g, double s) const {
        switch (edge) {
            case EdgeId::left: return {-1.0, 0.0};
            case EdgeId::right: return {1.0, 0.0};
            case EdgeId::bottom: return {0.0, -1.0};
            case EdgeId::top: return {0.0, 1.0};
            case EdgeId::hole: {
                // material lies outside the circle: outward is toward the centre
                const double a = a0 + (a1 - a0) * s;
                return {-std::cos(a), -std::sin(a)};
            }
        }
        return {0, 0};
    }

    /// Arc/segment length (used to weight sampling densities).
    double length(const Geometry& g) const {
        if (edge == EdgeId::hole) return std::abs(a1 - a0) * g.hole_r;
        return std::abs(a1 - a0);
    }
};

/// Zero-by-default initial state (all shipped problems start at rest).
struct InitialCondition {
    std::array<double, 2> displacement{0, 0};
    std::array<double, 2> velocity{0, 0};
};

/// Condition masks a segment imposes, per displacement/traction component.
/// bit0 = x component, bit1 = y component.
struct SegmentCondition {
    unsigned dir_mask = 0;
    unsigned trac_mask = 0;
};

inline SegmentCondition segment_condition(const BoundarySegment& s) {
    switch (s.kind) {
        case SegmentKind::dirichlet: return {3u, 0u};
        case SegmentKind::neumann:
        case SegmentKind::traction_free: return {0u, 3u};
        case SegmentKind::symmetry_x: return {1u, 2u};  // u = 0, t_y (shear) = 0
        case SegmentKind::symmetry_y: return {2u, 1u};  // v = 0, t_x (shear) = 0
        case SegmentKind::free_edge: return {0u, 0u};
    }
    return {0u, 0u};
}

}  // namespace pinnelast::geom
