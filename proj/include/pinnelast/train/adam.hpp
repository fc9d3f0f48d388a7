#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pinnelast::train {

struct NumericalAbort : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// First/second-moment state of the Adam optimizer.
struct AdamState {
    std::vector<double> m, v;
    long long step = 0;
    double lr = 1e-3;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    explicit AdamState(std::size_t n, double learning_rate = 1e-3)
        : m(n, 0.0), v(n, 0.0), lr(learning_rate) {}
};

/// Standard bias-corrected update, in place. Deterministic; throws on a
/// non-finite gradient so the caller can attach point diagnostics.
inline void adam_step(AdamState& st, std::span<double> theta, std::span<const double> grad) {
    if (theta.size() != st.m.size() || grad.size() != st.m.size())
        throw std::invalid_argument("adam_step: shape mismatch");
    ++st.step;
    const double b1 = st.beta1, b2 = st.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(st.step));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(st.step));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double g = grad[i];
        if (!std::isfinite(g))
            throw NumericalAbort("non-finite gradient component " + std::to_string(i));
        st.m[i] = b1 * st.m[i] + (1 - b1) * g;
        st.v[i] = b2 * st.v[i] + (1 - b2) * g * g;
        const double mhat = st.m[i] / c1;
        const double vhat = st.v[i] / c2;
        theta[i] -= st.lr * mhat / (std::sqrt(vhat) + st.eps);
    }
}

}  // namespace pinnelast::train
