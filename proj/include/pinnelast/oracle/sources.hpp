#pragma once

#include <cmath>
#include <stdexcept>

namespace pinnelast::oracle {

enum class SourceKind { gaussian, ricker };

/// Radial displacement pulse prescribed on a wave source.
/// gaussian: U0 exp(-((t-ts)/tp)^2)
/// ricker:   U0 (2 pi^2 ((t-ts)/tp)^2 - 1) exp(-pi^2 ((t-ts)/tp)^2)
template <class S>
S source_profile(SourceKind kind, const S& t, double U0, double ts, double tp) {
    if (tp <= 0) throw std::invalid_argument("source_profile: tp must be positive");
    const S s = (t - ts) * (1.0 / tp);
    if (kind == SourceKind::gaussian) {
        return U0 * exp(-(s * s));
    }
    constexpr double pi2 = 9.869604401089358;  // pi^2
    const S s2 = s * s;
    return U0 * (2.0 * pi2 * s2 - 1.0) * exp(-(pi2 * s2));
}

inline double source_profile(SourceKind kind, double t, double U0, double ts, double tp) {
    return source_profile<double>(kind, t, U0, ts, tp);
}

/// d/dt of the pulse (used by velocity-driven reference solvers).
inline double source_profile_dt(SourceKind kind, double t, double U0, double ts, double tp) {
    const double s = (t - ts) / tp;
    if (kind == SourceKind::gaussian) return U0 * std::exp(-s * s) * (-2.0 * s) / tp;
    constexpr double pi2 = 9.869604401089358;
    const double e = std::exp(-pi2 * s * s);
    // d/ds [(2 pi^2 s^2 - 1) e^{-pi^2 s^2}] = e * (4 pi^2 s - (2 pi^2 s^2 - 1) 2 pi^2 s)
    const double dds = e * (4.0 * pi2 * s - (2.0 * pi2 * s * s - 1.0) * 2.0 * pi2 * s);
    return U0 * dds / tp;
}

}  // namespace pinnelast::oracle
