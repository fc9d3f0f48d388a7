#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pinnelast/elast/material.hpp"
#include "pinnelast/oracle/sources.hpp"

namespace pinnelast::oracle {

enum class EdgeCondition { fixed, free_surface, truncation };

struct FdmError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Velocity-stress staggered-grid solver for 2D elastodynamics (P-SV).
/// Normal stresses and tracked displacements live on integer nodes, shear
/// stress at cell centres, velocities on the staggered half grids; leapfrog
/// in time. A circular source drives the radial velocity inside its disk so
/// the disk boundary carries the prescribed radial displacement pulse.
class FdmElastodynamics {
  public:
    struct Config {
        double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
        int nx = 100, ny = 100;  // cells per axis
        double dt = 0;           // 0: pick from the CFL factor
        double cfl = 0.4;
        double duration = 1.0;
        elast::Material material;                    // rho must be positive
        double src_cx = 0, src_cy = 0, src_r = 0;    // 0 radius: no source
        double src_taper = -1;      // relaxation band width across the rim; <0: src_r/3
        double src_relax_tau = -1;  // band relaxation time; <0: tp/50
        SourceKind src_kind = SourceKind::gaussian;
        double U0 = 0, ts = 0, tp = 1;
        std::array<EdgeCondition, 4> edges{EdgeCondition::fixed, EdgeCondition::fixed,
                                           EdgeCondition::fixed, EdgeCondition::fixed};
        // order: left, right, bottom, top

        /// Optional smooth initial state (curl-free Gaussian displacement
        /// pulse u = grad(A exp(-r^2/s^2)), zero velocity); exercises the
        /// scheme without an immersed source.
        struct InitPulse {
            double A = 0, s = 1, cx = 0, cy = 0;
        } init_pulse;
    };

    struct Snapshot {
        double t = 0;
        int nx = 0, ny = 0;  // node counts
        std::vector<double> u, v, sxx, syy, sxy;  // node-centred fields
    };

    explicit FdmElastodynamics(const Config& c) : c_(c) {
        c_.material.validate();
        if (!(c_.material.rho > 0)) throw FdmError("fdm: rho must be positive");
        nx_ = c_.nx;
        ny_ = c_.ny;
        dx_ = (c_.x1 - c_.x0) / nx_;
        dy_ = (c_.y1 - c_.y0) / ny_;
        const double cp = c_.material.p_wave_speed();
        const double dt_max = c_.cfl * std::min(dx_, dy_) / cp;
        if (c_.dt <= 0) {
            // round down so the duration is an integer number of steps and
            // snapshots land at identical times across resolutions
            const int steps = static_cast<int>(std::ceil(c_.duration / dt_max));
            c_.dt = c_.duration / steps;
        } else if (c_.dt > dt_max * (1 + 1e-12)) {
            throw FdmError("fdm: time step violates the CFL bound " + std::to_string(dt_max));
        }
        if (c_.src_taper < 0) c_.src_taper = c_.src_r / 3.0;
        if (c_.src_relax_tau < 0) c_.src_relax_tau = c_.tp / 50.0;
        const double E = c_.material.E, nu = c_.material.nu;
        mu_ = E / (2 * (1 + nu));
        if (c_.material.mode == elast::PlaneMode::strain)
            lam_ = E * nu / ((1 + nu) * (1 - 2 * nu));
        else
            lam_ = E * nu / (1 - nu * nu);
        alloc();
        if (c_.init_pulse.A != 0.0) seed_initial_pulse();
    }

    /// Marches to `duration`, invoking `on_snapshot` at the requested times
    /// (each fires once, at the first step reaching it).
    void run(std::vector<double> snapshot_times,
             const std::function<void(const Snapshot&)>& on_snapshot) {
        std::sort(snapshot_times.begin(), snapshot_times.end());
        std::size_t next_snap = 0;
        const int steps = static_cast<int>(std::ceil(c_.duration / c_.dt));
        double ref_norm = 0;
        for (int n = 0; n <= steps; ++n) {
            const double t = n * c_.dt;
            while (next_snap < snapshot_times.size() && t >= snapshot_times[next_snap] - 1e-12) {
                on_snapshot(make_snapshot(t));
                ++next_snap;
            }
            if (n == steps) break;
            step(t);
            const double nrm = field_norm();
            if (n == 20) ref_norm = std::max(nrm, 1e-30);
            if (n > 20 && ref_norm > 0 && nrm > 1e6 * ref_norm)
                throw FdmError("fdm: instability detected at step " + std::to_string(n));
        }
    }

    Snapshot snapshot_at_end() {
        Snapshot out;
        run({c_.duration}, [&](const Snapshot& s) { out = s; });
        return out;
    }

    /// Sampled time series of node-interpolated (u, v) at a station.
    struct Series {
        std::vector<double> t, u, v;
    };
    Series station_series(double sx, double sy, double sample_dt) {
        Series s;
        const int steps = static_cast<int>(std::ceil(c_.duration / c_.dt));
        double next = 0;
        for (int n = 0; n <= steps; ++n) {
            const double t = n * c_.dt;
            if (t >= next - 1e-12) {
                s.t.push_back(t);
                s.u.push_back(interp(u_, sx, sy));
                s.v.push_back(interp(v_, sx, sy));
                next += sample_dt;
            }
            if (n == steps) break;
            step(t);
        }
        return s;
    }

    double dt() const { return c_.dt; }
    double total_energy() const { return energy_; }

  private:
    void seed_initial_pulse() {
        const auto& ip = c_.init_pulse;
        const double s2 = ip.s * ip.s;
        auto disp = [&](double x, double y, double& ux, double& uy) {
            const double rx = x - ip.cx, ry = y - ip.cy;
            const double e = std::exp(-(rx * rx + ry * ry) / s2);
            ux = -2.0 * ip.A * rx / s2 * e;
            uy = -2.0 * ip.A * ry / s2 * e;
        };
        for (int i = 0; i <= nx_; ++i)
            for (int j = 0; j <= ny_; ++j) {
                const double x = node_x(i), y = node_y(j);
                const double rx = x - ip.cx, ry = y - ip.cy;
                const double e = std::exp(-(rx * rx + ry * ry) / s2);
                const double exx = -2.0 * ip.A / s2 * e * (1.0 - 2.0 * rx * rx / s2);
                const double eyy = -2.0 * ip.A / s2 * e * (1.0 - 2.0 * ry * ry / s2);
                sxx_[N(i, j)] = (lam_ + 2 * mu_) * exx + lam_ * eyy;
                syy_[N(i, j)] = lam_ * exx + (lam_ + 2 * mu_) * eyy;
                disp(x, y, u_[N(i, j)], v_[N(i, j)]);
            }
        for (int i = 0; i < nx_; ++i)
            for (int j = 0; j < ny_; ++j) {
                const double x = c_.x0 + (i + 0.5) * dx_, y = c_.y0 + (j + 0.5) * dy_;
                const double rx = x - ip.cx, ry = y - ip.cy;
                const double e = std::exp(-(rx * rx + ry * ry) / s2);
                const double gxy = 8.0 * ip.A * rx * ry / (s2 * s2) * e;
                sxy_[C(i, j)] = mu_ * gxy;
            }
        half_start_ = true;  // first velocity kick integrates only dt/2
    }

    void alloc() {
        const int nxn = nx_ + 1, nyn = ny_ + 1;
        sxx_.assign(nxn * nyn, 0.0);
        syy_.assign(nxn * nyn, 0.0);
        u_.assign(nxn * nyn, 0.0);
        v_.assign(nxn * nyn, 0.0);
        sxy_.assign(nx_ * ny_, 0.0);
        vx_.assign(nx_ * nyn, 0.0);
        vy_.assign(nxn * ny_, 0.0);
        vx_prev_ = vx_;
        vy_prev_ = vy_;
    }

    // index helpers
    int N(int i, int j) const { return i * (ny_ + 1) + j; }      // node fields
    int C(int i, int j) const { return i * ny_ + j; }            // cell fields
    int X(int i, int j) const { return i * (ny_ + 1) + j; }      // vx (i+1/2, j)
    int Y(int i, int j) const { return i * ny_ + j; }            // vy (i, j+1/2)

    /// Per-step blend toward the prescribed source motion. The disk core is
    /// clamped outright; across the rim the pull is a relaxation with a fixed
    /// physical time constant, so the discrete problem is resolution
    /// independent and the scheme keeps its second-order convergence.
    double source_weight(double x, double y) const {
        if (c_.src_r <= 0) return 0.0;
        const double r = std::hypot(x - c_.src_cx, y - c_.src_cy);
        const double w = std::max(c_.src_taper, 1e-12);
        const double s = (c_.src_r + 0.5 * w - r) / w;
        if (s <= 0) return 0.0;
        if (s >= 1) return 1.0;  // hard clamp in the core
        const double chi = 0.5 - 0.5 * std::cos(M_PI * s);
        return 1.0 - std::exp(-c_.dt * chi / c_.src_relax_tau);
    }

    void step(double t) {
        const double dt = c_.dt;
        const double rho = c_.material.rho;
        const double dtv = half_start_ ? 0.5 * dt : dt;
        half_start_ = false;
        vx_prev_ = vx_;
        vy_prev_ = vy_;
        // velocity update at t + dt/2
        for (int i = 0; i < nx_; ++i)
            for (int j = 0; j <= ny_; ++j) {
                const double dsxx = (sxx_[N(i + 1, j)] - sxx_[N(i, j)]) / dx_;
                double dsxy;
                if (j == 0)
                    dsxy = c_.edges[2] == EdgeCondition::free_surface
                               ? (sxy_[C(i, 0)] - (-sxy_[C(i, 0)])) / dy_
                               : (sxy_[C(i, 0)] - 0.0) / dy_;
                else if (j == ny_)
                    dsxy = c_.edges[3] == EdgeCondition::free_surface
                               ? ((-sxy_[C(i, ny_ - 1)]) - sxy_[C(i, ny_ - 1)]) / dy_
                               : (0.0 - sxy_[C(i, ny_ - 1)]) / dy_;
                else
                    dsxy = (sxy_[C(i, j)] - sxy_[C(i, j - 1)]) / dy_;
                vx_[X(i, j)] += dtv / rho * (dsxx + dsxy);
            }
        for (int i = 0; i <= nx_; ++i)
            for (int j = 0; j < ny_; ++j) {
                const double dsyy = (syy_[N(i, j + 1)] - syy_[N(i, j)]) / dy_;
                double dsxy;
                if (i == 0)
                    dsxy = c_.edges[0] == EdgeCondition::free_surface
                               ? (sxy_[C(0, j)] - (-sxy_[C(0, j)])) / dx_
                               : (sxy_[C(0, j)] - 0.0) / dx_;
                else if (i == nx_)
                    dsxy = c_.edges[1] == EdgeCondition::free_surface
                               ? ((-sxy_[C(nx_ - 1, j)]) - sxy_[C(nx_ - 1, j)]) / dx_
                               : (0.0 - sxy_[C(nx_ - 1, j)]) / dx_;
                else
                    dsxy = (sxy_[C(i, j)] - sxy_[C(i - 1, j)]) / dx_;
                vy_[Y(i, j)] += dtv / rho * (dsyy + dsxy);
            }

        // fixed edges clamp the tangential/normal velocities on the boundary
        apply_velocity_bc();
        // prescribed source velocity at t + dt/2 (blended across the rim)
        if (c_.src_r > 0) {
            const double th = t + 0.5 * dt;
            const double dpdt = source_profile_dt(c_.src_kind, th, c_.U0, c_.ts, c_.tp);
            for (int i = 0; i < nx_; ++i)
                for (int j = 0; j <= ny_; ++j) {
                    const double x = c_.x0 + (i + 0.5) * dx_, y = c_.y0 + j * dy_;
                    const double a = source_weight(x, y);
                    if (a <= 0) continue;
                    const double r = std::max(1e-12, std::hypot(x - c_.src_cx, y - c_.src_cy));
                    vx_[X(i, j)] = a * dpdt * (x - c_.src_cx) / r + (1 - a) * vx_[X(i, j)];
                }
            for (int i = 0; i <= nx_; ++i)
                for (int j = 0; j < ny_; ++j) {
                    const double x = c_.x0 + i * dx_, y = c_.y0 + (j + 0.5) * dy_;
                    const double a = source_weight(x, y);
                    if (a <= 0) continue;
                    const double r = std::max(1e-12, std::hypot(x - c_.src_cx, y - c_.src_cy));
                    vy_[Y(i, j)] = a * dpdt * (y - c_.src_cy) / r + (1 - a) * vy_[Y(i, j)];
                }
        }

        // stress update at t + dt
        for (int i = 0; i <= nx_; ++i)
            for (int j = 0; j <= ny_; ++j) {
                double dvx, dvy;
                if (i == 0) dvx = vx_[X(0, j)] / (0.5 * dx_);
                else if (i == nx_) dvx = -vx_[X(nx_ - 1, j)] / (0.5 * dx_);
                else dvx = (vx_[X(i, j)] - vx_[X(i - 1, j)]) / dx_;
                if (j == 0) dvy = vy_[Y(i, 0)] / (0.5 * dy_);
                else if (j == ny_) dvy = -vy_[Y(i, ny_ - 1)] / (0.5 * dy_);
                else dvy = (vy_[Y(i, j)] - vy_[Y(i, j - 1)]) / dy_;
                sxx_[N(i, j)] += dt * ((lam_ + 2 * mu_) * dvx + lam_ * dvy);
                syy_[N(i, j)] += dt * (lam_ * dvx + (lam_ + 2 * mu_) * dvy);
            }
        for (int i = 0; i < nx_; ++i)
            for (int j = 0; j < ny_; ++j) {
                const double dvxy = (vx_[X(i, j + 1)] - vx_[X(i, j)]) / dy_;
                const double dvyx = (vy_[Y(i + 1, j)] - vy_[Y(i, j)]) / dx_;
                sxy_[C(i, j)] += dt * mu_ * (dvxy + dvyx);
            }
        apply_stress_bc();

        // displacement tracking on nodes
        for (int i = 0; i <= nx_; ++i)
            for (int j = 0; j <= ny_; ++j) {
                double vxn, vyn;
                if (i == 0) vxn = vx_[X(0, j)];
                else if (i == nx_) vxn = vx_[X(nx_ - 1, j)];
                else vxn = 0.5 * (vx_[X(i - 1, j)] + vx_[X(i, j)]);
                if (j == 0) vyn = vy_[Y(i, 0)];
                else if (j == ny_) vyn = vy_[Y(i, ny_ - 1)];
                else vyn = 0.5 * (vy_[Y(i, j - 1)] + vy_[Y(i, j)]);
                u_[N(i, j)] += dt * vxn;
                v_[N(i, j)] += dt * vyn;
            }
        // keep the disk interior on the prescribed displacement
        if (c_.src_r > 0) {
            const double tn = t + dt;
            const double p = source_profile(c_.src_kind, tn, c_.U0, c_.ts, c_.tp);
            for (int i = 0; i <= nx_; ++i)
                for (int j = 0; j <= ny_; ++j) {
                    const double x = c_.x0 + i * dx_, y = c_.y0 + j * dy_;
                    const double a = source_weight(x, y);
                    if (a <= 0) continue;
                    const double r = std::max(1e-12, std::hypot(x - c_.src_cx, y - c_.src_cy));
                    u_[N(i, j)] = a * p * (x - c_.src_cx) / r + (1 - a) * u_[N(i, j)];
                    v_[N(i, j)] = a * p * (y - c_.src_cy) / r + (1 - a) * v_[N(i, j)];
                }
        }
        update_energy();
    }

    void apply_velocity_bc() {
        // left/right edges: vy nodes sit on the edge at i = 0, nx
        if (c_.edges[0] == EdgeCondition::fixed)
            for (int j = 0; j < ny_; ++j) vy_[Y(0, j)] = 0.0;
        if (c_.edges[1] == EdgeCondition::fixed)
            for (int j = 0; j < ny_; ++j) vy_[Y(nx_, j)] = 0.0;
        if (c_.edges[2] == EdgeCondition::fixed)
            for (int i = 0; i < nx_; ++i) vx_[X(i, 0)] = 0.0;
        if (c_.edges[3] == EdgeCondition::fixed)
            for (int i = 0; i < nx_; ++i) vx_[X(i, ny_)] = 0.0;
    }

    void apply_stress_bc() {
        if (c_.edges[0] == EdgeCondition::free_surface)
            for (int j = 0; j <= ny_; ++j) sxx_[N(0, j)] = 0.0;
        if (c_.edges[1] == EdgeCondition::free_surface)
            for (int j = 0; j <= ny_; ++j) sxx_[N(nx_, j)] = 0.0;
        if (c_.edges[2] == EdgeCondition::free_surface)
            for (int i = 0; i <= nx_; ++i) syy_[N(i, 0)] = 0.0;
        if (c_.edges[3] == EdgeCondition::free_surface)
            for (int i = 0; i <= nx_; ++i) syy_[N(i, ny_)] = 0.0;
        // fixed edges: normal velocity already clamped; normal stresses evolve freely
    }

    void update_energy() {
        // kinetic term as the staggered product <v^{n-1/2}, v^{n+1/2}> (the
        // form the leapfrog conserves), elastic term from the compliance
        double kin = 0;
        for (std::size_t k = 0; k < vx_.size(); ++k) kin += vx_prev_[k] * vx_[k];
        for (std::size_t k = 0; k < vy_.size(); ++k) kin += vy_prev_[k] * vy_[k];
        kin *= 0.5 * c_.material.rho * dx_ * dy_;
        const double lam = lam_, mu = mu_;
        const double det = 4 * mu * (lam + mu);
        double ela = 0;
        for (int i = 0; i <= nx_; ++i)
            for (int j = 0; j <= ny_; ++j) {
                const double sxx = sxx_[N(i, j)], syy = syy_[N(i, j)];
                const double exx = ((lam + 2 * mu) * sxx - lam * syy) / det;
                const double eyy = ((lam + 2 * mu) * syy - lam * sxx) / det;
                const double w = (i == 0 || i == nx_ ? 0.5 : 1.0) *
                                 (j == 0 || j == ny_ ? 0.5 : 1.0);
                ela += w * 0.5 * (sxx * exx + syy * eyy);
            }
        for (double s : sxy_) ela += 0.5 * s * s / mu;
        ela *= dx_ * dy_;
        energy_ = kin + ela;
    }

    double field_norm() const {
        double m = 0;
        for (double w : vx_) m = std::max(m, std::abs(w));
        for (double w : vy_) m = std::max(m, std::abs(w));
        return m;
    }

    double interp(const std::vector<double>& f, double x, double y) const {
        const double gx = std::clamp((x - c_.x0) / dx_, 0.0, static_cast<double>(nx_));
        const double gy = std::clamp((y - c_.y0) / dy_, 0.0, static_cast<double>(ny_));
        const int i = std::min(static_cast<int>(gx), nx_ - 1);
        const int j = std::min(static_cast<int>(gy), ny_ - 1);
        const double fx = gx - i, fy = gy - j;
        return (1 - fx) * (1 - fy) * f[N(i, j)] + fx * (1 - fy) * f[N(i + 1, j)] +
               (1 - fx) * fy * f[N(i, j + 1)] + fx * fy * f[N(i + 1, j + 1)];
    }

    Snapshot make_snapshot(double t) const {
        Snapshot s;
        s.t = t;
        s.nx = nx_ + 1;
        s.ny = ny_ + 1;
        s.u = u_;
        s.v = v_;
        s.sxx = sxx_;
        s.syy = syy_;
        // shear interpolated to nodes
        s.sxy.assign((nx_ + 1) * (ny_ + 1), 0.0);
        for (int i = 0; i <= nx_; ++i)
            for (int j = 0; j <= ny_; ++j) {
                double acc = 0;
                int cnt = 0;
                for (int a = i - 1; a <= i; ++a)
                    for (int b = j - 1; b <= j; ++b)
                        if (a >= 0 && a < nx_ && b >= 0 && b < ny_) {
                            acc += sxy_[C(a, b)];
                            ++cnt;
                        }
                s.sxy[N(i, j)] = cnt ? acc / cnt : 0.0;
            }
        return s;
    }

  public:
    /// Node coordinates of snapshot grids.
    double node_x(int i) const { return c_.x0 + i * dx_; }
    double node_y(int j) const { return c_.y0 + j * dy_; }
    const Config& config() const { return c_; }

  private:
    Config c_;
    bool half_start_ = false;
    int nx_ = 0, ny_ = 0;
    double dx_ = 0, dy_ = 0, lam_ = 0, mu_ = 0;
    std::vector<double> sxx_, syy_, sxy_, vx_, vy_, u_, v_;
    std::vector<double> vx_prev_, vy_prev_;
    double energy_ = 0;
};

}  // namespace pinnelast::oracle
