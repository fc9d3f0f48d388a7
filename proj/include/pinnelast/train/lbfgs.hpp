#pragma once

#include <cmath>
#include <deque>
#include <functional>
#include <span>
#include <vector>

namespace pinnelast::train {

/// Objective contract: writes the gradient of f at theta into `grad`
/// and returns f(theta).
using Objective = std::function<double(std::span<const double>, std::span<double>)>;

enum class LbfgsStatus {
    converged_gradient,
    converged_loss_change,
    budget_exhausted,
    line_search_failed,
    already_minimized,
};

inline const char* to_string(LbfgsStatus s) {
    switch (s) {
        case LbfgsStatus::converged_gradient: return "converged (gradient norm)";
        case LbfgsStatus::converged_loss_change: return "converged (loss change)";
        case LbfgsStatus::budget_exhausted: return "iteration budget exhausted";
        case LbfgsStatus::line_search_failed: return "line search failed";
        case LbfgsStatus::already_minimized: return "already at a stationary point";
    }
    return "?";
}

struct LbfgsOptions {
    int memory = 10;
    double c1 = 1e-4;  // sufficient decrease
    double c2 = 0.9;   // curvature
    double tol_grad = 1e-8;
    double tol_rel_loss = 1e-12;
    int max_iterations = 50000;
    int max_line_search = 20;
};

struct LbfgsReport {
    LbfgsStatus status = LbfgsStatus::budget_exhausted;
    int iterations = 0;
    long long evaluations = 0;
    double final_loss = 0;
    double grad_norm = 0;
    bool all_steps_wolfe = true;
};

namespace detail_lbfgs {

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double nrm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

struct Pair {
    std::vector<double> s, y;
    double rho;
};

}  // namespace detail_lbfgs

/// Limited-memory BFGS with the two-loop recursion and a strong-Wolfe line
/// search (bracket + zoom with bisection-guarded cubic steps). Accepted steps
/// satisfy both Wolfe conditions, so the loss never increases across iterates.
/// On a line-search failure the direction falls back to steepest descent once;
/// a repeated failure terminates with status line_search_failed.
template <class OnIter>
LbfgsReport lbfgs_minimize(const Objective& f, std::vector<double>& x, const LbfgsOptions& opt,
                           OnIter&& on_iter) {
    using namespace detail_lbfgs;
    const std::size_t n = x.size();
    LbfgsReport rep;
    std::vector<double> g(n), gnew(n), xnew(n), d(n);
    double fx = f(x, g);
    ++rep.evaluations;
    double gnorm = nrm2(g);
    if (gnorm < opt.tol_grad) {
        rep.status = LbfgsStatus::already_minimized;
        rep.final_loss = fx;
        rep.grad_norm = gnorm;
        return rep;
    }

    std::deque<Pair> ring;
    std::vector<double> q(n), alpha_buf;
    bool fell_back_last = false;

    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        // two-loop recursion: d = -H g
        q.assign(g.begin(), g.end());
        alpha_buf.assign(ring.size(), 0.0);
        for (int i = static_cast<int>(ring.size()) - 1; i >= 0; --i) {
            const auto& p = ring[i];
            const double a = p.rho * dot(p.s, q);
            alpha_buf[i] = a;
            for (std::size_t k = 0; k < n; ++k) q[k] -= a * p.y[k];
        }
        if (!ring.empty()) {
            const auto& last = ring.back();
            const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
            for (auto& v : q) v *= gamma;
        }
        for (std::size_t i = 0; i < ring.size(); ++i) {
            const auto& p = ring[i];
            const double b = p.rho * dot(p.y, q);
            for (std::size_t k = 0; k < n; ++k) q[k] += p.s[k] * (alpha_buf[i] - b);
        }
        for (std::size_t k = 0; k < n; ++k) d[k] = -q[k];

        double dg = dot(d, g);
        if (dg >= 0) {  // not a descent direction; restart from steepest descent
            ring.clear();
            for (std::size_t k = 0; k < n; ++k) d[k] = -g[k];
            dg = -gnorm * gnorm;
        }

        // strong-Wolfe line search (bracket + zoom, interpolation-guided)
        const double phi0 = fx, dphi0 = dg;
        const double f_noise = 1e-14 * std::max(1.0, std::abs(phi0));
        double alpha = ring.empty() ? std::min(1.0, 1.0 / std::max(1e-12, gnorm)) : 1.0;
        double alpha_prev = 0.0, phi_prev = phi0, dphi_prev = dphi0;
        double alpha_lo = 0, alpha_hi = 0, phi_lo = phi0, dphi_lo = dphi0, phi_hi = phi0;
        bool bracketed = false, found = false;
        double fnew = phi0, dphi = 0;

        auto eval_at = [&](double a) {
            for (std::size_t k = 0; k < n; ++k) xnew[k] = x[k] + a * d[k];
            fnew = f(xnew, gnew);
            ++rep.evaluations;
            dphi = dot(gnew, d);
        };
        auto armijo_ok = [&](double a) {
            return fnew <= phi0 + opt.c1 * a * dphi0 + f_noise;
        };

        for (int ls = 0; ls < opt.max_line_search; ++ls) {
            eval_at(alpha);
            if (!armijo_ok(alpha) || (ls > 0 && fnew >= phi_prev - f_noise)) {
                alpha_lo = alpha_prev;
                phi_lo = phi_prev;
                dphi_lo = dphi_prev;
                alpha_hi = alpha;
                phi_hi = fnew;
                bracketed = true;
                break;
            }
            if (std::abs(dphi) <= -opt.c2 * dphi0) {
                found = true;
                break;
            }
            if (dphi >= 0) {
                alpha_lo = alpha;
                phi_lo = fnew;
                dphi_lo = dphi;
                alpha_hi = alpha_prev;
                phi_hi = phi_prev;
                bracketed = true;
                break;
            }
            alpha_prev = alpha;
            phi_prev = fnew;
            dphi_prev = dphi;
            alpha *= 2.0;
            if (alpha > 1e6) break;
        }

        if (bracketed && !found) {
            for (int z = 0; z < 30 && !found; ++z) {
                // quadratic-interpolation trial (exact on quadratics),
                // safeguarded toward bisection
                double trial;
                const double span = alpha_hi - alpha_lo;
                const double denom = phi_hi - phi_lo - dphi_lo * span;
                if (std::abs(denom) > 1e-300) {
                    trial = alpha_lo - 0.5 * dphi_lo * span * span / denom;
                } else {
                    trial = alpha_lo + 0.5 * span;
                }
                const double lo = std::min(alpha_lo, alpha_hi), hi = std::max(alpha_lo, alpha_hi);
                const double margin = 0.1 * (hi - lo);
                if (!(trial >= lo + margin && trial <= hi - margin))
                    trial = alpha_lo + 0.5 * span;
                alpha = trial;
                eval_at(alpha);
                if (!armijo_ok(alpha) || fnew >= phi_lo - f_noise) {
                    alpha_hi = alpha;
                    phi_hi = fnew;
                } else {
                    if (std::abs(dphi) <= -opt.c2 * dphi0) {
                        found = true;
                        break;
                    }
                    if (dphi * (alpha_hi - alpha_lo) >= 0) {
                        alpha_hi = alpha_lo;
                        phi_hi = phi_lo;
                    }
                    alpha_lo = alpha;
                    phi_lo = fnew;
                    dphi_lo = dphi;
                }
                if (std::abs(alpha_hi - alpha_lo) < 1e-16 * std::max(1.0, std::abs(alpha_lo)))
                    break;
            }
        }

        if (!found) {
            if (fell_back_last) {
                rep.status = LbfgsStatus::line_search_failed;
                rep.iterations = iter;
                rep.final_loss = fx;
                rep.grad_norm = gnorm;
                return rep;
            }
            // steepest-descent fallback once
            ring.clear();
            fell_back_last = true;
            for (std::size_t k = 0; k < n; ++k) d[k] = -g[k];
            bool ok = false;
            double a = 1.0 / std::max(1.0, gnorm);
            for (int tries = 0; tries < 30; ++tries, a *= 0.5) {
                eval_at(a);
                if (fnew < fx) {
                    ok = true;
                    alpha = a;
                    break;
                }
            }
            if (!ok) {
                rep.status = LbfgsStatus::line_search_failed;
                rep.iterations = iter;
                rep.final_loss = fx;
                rep.grad_norm = gnorm;
                return rep;
            }
            rep.all_steps_wolfe = false;  // fallback step is plain decrease
        } else {
            fell_back_last = false;
        }

        // accept the step
        const double f_old = fx;
        std::vector<double> s(n), yv(n);
        for (std::size_t k = 0; k < n; ++k) {
            s[k] = xnew[k] - x[k];
            yv[k] = gnew[k] - g[k];
        }
        const double sy = dot(s, yv);
        x = xnew;
        fx = fnew;
        g = gnew;
        gnorm = nrm2(g);
        if (sy > 1e-12 * nrm2(s) * nrm2(yv)) {  // curvature condition
            ring.push_back(Pair{std::move(s), std::move(yv), 1.0 / sy});
            if (static_cast<int>(ring.size()) > opt.memory) ring.pop_front();
        }

        rep.iterations = iter + 1;
        const bool wolfe_ok = found;
        on_iter(iter + 1, fx, gnorm, wolfe_ok);

        if (gnorm < opt.tol_grad) {
            rep.status = LbfgsStatus::converged_gradient;
            break;
        }
        if (std::abs(f_old - fx) < opt.tol_rel_loss * std::max(1.0, std::abs(fx))) {
            rep.status = LbfgsStatus::converged_loss_change;
            break;
        }
    }
    rep.final_loss = fx;
    rep.grad_norm = gnorm;
    if (rep.status == LbfgsStatus::budget_exhausted && gnorm < opt.tol_grad)
        rep.status = LbfgsStatus::converged_gradient;
    return rep;
}

inline LbfgsReport lbfgs_minimize(const Objective& f, std::vector<double>& x,
                                  const LbfgsOptions& opt) {
    return lbfgs_minimize(f, x, opt, [](int, double, double, bool) {});
}

}  // namespace pinnelast::train
