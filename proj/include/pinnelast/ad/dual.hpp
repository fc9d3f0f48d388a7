#pragma once

#include <array>
#include <cmath>
#include <type_traits>

#include "pinnelast/ad/tape.hpp"

namespace pinnelast::ad {

/// Forward-mode dual with N tangent slots over an arbitrary scalar T.
///
/// T may be double, Var (tape node), or another Dual, which is how nested
/// derivatives are built: the outer arithmetic differentiates through the
/// inner one. Tangent slots holding an exact zero are skipped, so constants
/// (network weights seen from the input side, unseeded axes) cost nothing.
template <class T, int N = 1>
struct Dual {
    T v{};
    std::array<T, N> d{};
};

// --- scalar classification -------------------------------------------------

template <class T>
struct is_dual_t : std::false_type {};
template <class T, int N>
struct is_dual_t<Dual<T, N>> : std::true_type {};
template <class T>
inline constexpr bool is_dual_v = is_dual_t<T>::value;

inline double primal_value(double x) { return x; }
inline double primal_value(Var x) { return x.value(); }
template <class T, int N>
double primal_value(const Dual<T, N>& x) {
    return primal_value(x.v);
}

inline bool is_zero(double x) { return x == 0.0; }
inline bool is_zero(Var x) { return x.idx == Tape::kZero; }
template <class T, int N>
bool is_zero(const Dual<T, N>& x) {
    if (!is_zero(x.v)) return false;
    for (const auto& t : x.d)
        if (!is_zero(t)) return false;
    return true;
}

/// Customization point for base scalars usable inside Dual.
template <class T>
struct scalar_impl;

template <>
struct scalar_impl<double> {
    static double zero() { return 0.0; }
    static double constant(double c) { return c; }
};

template <>
struct scalar_impl<Var> {
    static Var zero() { return Var::zero(); }
    static Var constant(double c) { return make_constant(c); }
};

template <class T>
T zero_of() {
    if constexpr (is_dual_v<T>) {
        T z;
        using Inner = std::decay_t<decltype(z.v)>;
        z.v = zero_of<Inner>();
        for (auto& t : z.d) t = zero_of<Inner>();
        return z;
    } else {
        return scalar_impl<T>::zero();
    }
}

/// Lifts a runtime double into scalar type S (tape constant for tape scalars).
template <class S>
S from_const(double c) {
    if constexpr (is_dual_v<S>) {
        S r;
        using Inner = std::decay_t<decltype(r.v)>;
        r.v = from_const<Inner>(c);
        for (auto& t : r.d) t = zero_of<Inner>();
        return r;
    } else {
        return scalar_impl<S>::constant(c);
    }
}

/// Lifts a parameter scalar (double or a tape handle) into S with zero tangents.
template <class S, class P>
S lift_param(P p) {
    if constexpr (std::is_same_v<S, P>) return p;
    else if constexpr (!is_dual_v<S> && std::is_same_v<P, double>)
        return scalar_impl<S>::constant(p);
    else {
        static_assert(is_dual_v<S>, "parameter type must match or nest");
        S r;
        using Inner = std::decay_t<decltype(r.v)>;
        r.v = lift_param<Inner>(p);
        for (auto& t : r.d) t = zero_of<Inner>();
        return r;
    }
}

namespace detail_dual {
template <class A, class B>
using combine_t = std::decay_t<decltype(std::declval<A>() * std::declval<B>())>;

template <class C, class X>
C cvt(const X& x) {
    if constexpr (std::is_same_v<C, std::decay_t<X>>) return x;
    else if constexpr (std::is_same_v<C, Var> && std::is_same_v<std::decay_t<X>, double>)
        return make_constant(x);
    else {
        C r;
        using Inner = std::decay_t<decltype(r.v)>;
        if constexpr (is_dual_v<std::decay_t<X>>) {
            r.v = cvt<Inner>(x.v);
            for (std::size_t i = 0; i < r.d.size(); ++i) r.d[i] = cvt<Inner>(x.d[i]);
        } else {
            r.v = cvt<Inner>(x);
            for (auto& t : r.d) t = zero_of<Inner>();
        }
        return r;
    }
}
}  // namespace detail_dual

// --- dual (.) dual -----------------------------------------------------------

template <class A, class B, int N>
auto operator+(const Dual<A, N>& a, const Dual<B, N>& b) {
    using C = detail_dual::combine_t<A, B>;
    Dual<C, N> r;
    r.v = a.v + b.v;
    for (int i = 0; i < N; ++i) {
        const bool za = is_zero(a.d[i]), zb = is_zero(b.d[i]);
        if (za && zb) r.d[i] = zero_of<C>();
        else if (za) r.d[i] = detail_dual::cvt<C>(b.d[i]);
        else if (zb) r.d[i] = detail_dual::cvt<C>(a.d[i]);
        else r.d[i] = a.d[i] + b.d[i];
    }
    return r;
}

template <class A, class B, int N>
auto operator-(const Dual<A, N>& a, const Dual<B, N>& b) {
    using C = detail_dual::combine_t<A, B>;
    Dual<C, N> r;
    r.v = a.v - b.v;
    for (int i = 0; i < N; ++i) {
        const bool za = is_zero(a.d[i]), zb = is_zero(b.d[i]);
        if (za && zb) r.d[i] = zero_of<C>();
        else if (za) r.d[i] = detail_dual::cvt<C>(-b.d[i]);
        else if (zb) r.d[i] = detail_dual::cvt<C>(a.d[i]);
        else r.d[i] = a.d[i] - b.d[i];
    }
    return r;
}

template <class A, class B, int N>
auto operator*(const Dual<A, N>& a, const Dual<B, N>& b) {
    using C = detail_dual::combine_t<A, B>;
    Dual<C, N> r;
    r.v = a.v * b.v;
    for (int i = 0; i < N; ++i) {
        const bool za = is_zero(a.d[i]), zb = is_zero(b.d[i]);
        if (za && zb) r.d[i] = zero_of<C>();
        else if (za) r.d[i] = a.v * b.d[i];
        else if (zb) r.d[i] = a.d[i] * b.v;
        else r.d[i] = a.v * b.d[i] + a.d[i] * b.v;
    }
    return r;
}

template <class A, class B, int N>
auto operator/(const Dual<A, N>& a, const Dual<B, N>& b) {
    using C = detail_dual::combine_t<A, B>;
    Dual<C, N> r;
    r.v = a.v / b.v;
    for (int i = 0; i < N; ++i) {
        const bool za = is_zero(a.d[i]), zb = is_zero(b.d[i]);
        if (za && zb) r.d[i] = zero_of<C>();
        else if (zb) r.d[i] = a.d[i] / b.v;
        else if (za) r.d[i] = -(r.v * b.d[i]) / b.v;
        else r.d[i] = (a.d[i] - r.v * b.d[i]) / b.v;
    }
    return r;
}

template <class T, int N>
Dual<T, N> operator-(const Dual<T, N>& a) {
    Dual<T, N> r;
    r.v = -a.v;
    for (int i = 0; i < N; ++i) r.d[i] = is_zero(a.d[i]) ? zero_of<T>() : -a.d[i];
    return r;
}

// --- dual (.) plain double ----------------------------------------------------

template <class T, int N>
Dual<T, N> operator+(const Dual<T, N>& a, double c) {
    Dual<T, N> r = a;
    r.v = a.v + c;
    return r;
}
template <class T, int N>
Dual<T, N> operator+(double c, const Dual<T, N>& a) {
    return a + c;
}

template <class T, int N>
Dual<T, N> operator-(const Dual<T, N>& a, double c) {
    Dual<T, N> r = a;
    r.v = a.v - c;
    return r;
}
template <class T, int N>
Dual<T, N> operator-(double c, const Dual<T, N>& a) {
    Dual<T, N> r;
    r.v = c - a.v;
    for (int i = 0; i < N; ++i) r.d[i] = is_zero(a.d[i]) ? zero_of<T>() : -a.d[i];
    return r;
}

template <class T, int N>
Dual<T, N> operator*(const Dual<T, N>& a, double c) {
    if (c == 1.0) return a;
    Dual<T, N> r;
    r.v = a.v * c;
    for (int i = 0; i < N; ++i) r.d[i] = is_zero(a.d[i]) ? zero_of<T>() : a.d[i] * c;
    return r;
}
template <class T, int N>
Dual<T, N> operator*(double c, const Dual<T, N>& a) {
    return a * c;
}

template <class T, int N>
Dual<T, N> operator/(const Dual<T, N>& a, double c) {
    return a * (1.0 / c);
}

template <class T, int N>
Dual<T, N> operator/(double c, const Dual<T, N>& a) {
    Dual<T, N> r;
    r.v = c / a.v;
    for (int i = 0; i < N; ++i)
        r.d[i] = is_zero(a.d[i]) ? zero_of<T>() : -(r.v / a.v) * a.d[i];
    return r;
}

// --- transcendentals ---------------------------------------------------------

using std::cos;
using std::exp;
using std::sin;
using std::tanh;

template <class T, int N>
Dual<T, N> tanh(const Dual<T, N>& a) {
    Dual<T, N> r;
    r.v = tanh(a.v);
    bool any = false;
    for (int i = 0; i < N; ++i) any = any || !is_zero(a.d[i]);
    if (!any) {
        for (int i = 0; i < N; ++i) r.d[i] = zero_of<T>();
        return r;
    }
    const T g = 1.0 - r.v * r.v;
    for (int i = 0; i < N; ++i) r.d[i] = is_zero(a.d[i]) ? zero_of<T>() : g * a.d[i];
    return r;
}

template <class T, int N>
Dual<T, N> exp(const Dual<T, N>& a) {
    Dual<T, N> r;
    r.v = exp(a.v);
    for (int i = 0; i < N; ++i) r.d[i] = is_zero(a.d[i]) ? zero_of<T>() : r.v * a.d[i];
    return r;
}

template <class T, int N>
Dual<T, N> sin(const Dual<T, N>& a) {
    Dual<T, N> r;
    r.v = sin(a.v);
    bool any = false;
    for (int i = 0; i < N; ++i) any = any || !is_zero(a.d[i]);
    if (!any) {
        for (int i = 0; i < N; ++i) r.d[i] = zero_of<T>();
        return r;
    }
    const T g = cos(a.v);
    for (int i = 0; i < N; ++i) r.d[i] = is_zero(a.d[i]) ? zero_of<T>() : g * a.d[i];
    return r;
}

template <class T, int N>
Dual<T, N> cos(const Dual<T, N>& a) {
    Dual<T, N> r;
    r.v = cos(a.v);
    bool any = false;
    for (int i = 0; i < N; ++i) any = any || !is_zero(a.d[i]);
    if (!any) {
        for (int i = 0; i < N; ++i) r.d[i] = zero_of<T>();
        return r;
    }
    const T g = -sin(a.v);
    for (int i = 0; i < N; ++i) r.d[i] = is_zero(a.d[i]) ? zero_of<T>() : g * a.d[i];
    return r;
}

inline double powi(double a, int n) { return std::pow(a, n); }

template <class T, int N>
Dual<T, N> powi(const Dual<T, N>& a, int n) {
    Dual<T, N> r;
    if (n == 0) return from_const<Dual<T, N>>(1.0);
    r.v = powi(a.v, n);
    bool any = false;
    for (int i = 0; i < N; ++i) any = any || !is_zero(a.d[i]);
    if (!any) {
        for (int i = 0; i < N; ++i) r.d[i] = zero_of<T>();
        return r;
    }
    const T g = static_cast<double>(n) * powi(a.v, n - 1);
    for (int i = 0; i < N; ++i) r.d[i] = is_zero(a.d[i]) ? zero_of<T>() : g * a.d[i];
    return r;
}

/// Scalar used for plain first derivatives off the tape.
using Dual1 = Dual<double, 1>;
/// Two spatial tangents at once (d/dx and d/dy in a single pass).
using Dual2 = Dual<double, 2>;

}  // namespace pinnelast::ad
