#pragma once

// Small forward-mode helpers.
//
// Dual<K>    first-order number with K tangent directions.
// Jet<S>     value, gradient and packed Hessian in up to three variables,
//            generic over the scalar S (double or Dual<K>).

#include <array>
#include <cmath>
#include <cstddef>

namespace slpinn {

template <std::size_t K>
struct Dual {
    double v = 0.0;
    std::array<double, K> d{};

    Dual() = default;
    Dual(double value) : v(value) {}  // NOLINT(google-explicit-constructor)

    static Dual variable(double value, std::size_t slot) {
        Dual out(value);
        out.d[slot] = 1.0;
        return out;
    }

    Dual& operator+=(const Dual& o) {
        v += o.v;
        for (std::size_t k = 0; k < K; ++k) d[k] += o.d[k];
        return *this;
    }
    Dual& operator-=(const Dual& o) {
        v -= o.v;
        for (std::size_t k = 0; k < K; ++k) d[k] -= o.d[k];
        return *this;
    }
    Dual& operator*=(const Dual& o) {
        for (std::size_t k = 0; k < K; ++k) d[k] = d[k] * o.v + v * o.d[k];
        v *= o.v;
        return *this;
    }
    Dual& operator/=(const Dual& o) {
        const double inv = 1.0 / o.v;
        for (std::size_t k = 0; k < K; ++k) d[k] = (d[k] - v * inv * o.d[k]) * inv;
        v *= inv;
        return *this;
    }
};

template <std::size_t K> Dual<K> operator+(Dual<K> a, const Dual<K>& b) { return a += b; }
template <std::size_t K> Dual<K> operator-(Dual<K> a, const Dual<K>& b) { return a -= b; }
template <std::size_t K> Dual<K> operator*(Dual<K> a, const Dual<K>& b) { return a *= b; }
template <std::size_t K> Dual<K> operator/(Dual<K> a, const Dual<K>& b) { return a /= b; }
template <std::size_t K> Dual<K> operator+(Dual<K> a, double b) { a.v += b; return a; }
template <std::size_t K> Dual<K> operator+(double b, Dual<K> a) { a.v += b; return a; }
template <std::size_t K> Dual<K> operator-(Dual<K> a, double b) { a.v -= b; return a; }
template <std::size_t K> Dual<K> operator-(double b, const Dual<K>& a) { return Dual<K>(b) - a; }
template <std::size_t K>
Dual<K> operator*(Dual<K> a, double b) {
    a.v *= b;
    for (auto& x : a.d) x *= b;
    return a;
}
template <std::size_t K> Dual<K> operator*(double b, Dual<K> a) { return a * b; }
template <std::size_t K> Dual<K> operator/(Dual<K> a, double b) { return a * (1.0 / b); }
template <std::size_t K> Dual<K> operator-(Dual<K> a) { return a * -1.0; }

template <std::size_t K>
Dual<K> chain(const Dual<K>& a, double f, double df) {
    Dual<K> out(f);
    for (std::size_t k = 0; k < K; ++k) out.d[k] = df * a.d[k];
    return out;
}
template <std::size_t K> Dual<K> exp(const Dual<K>& a) { const double e = std::exp(a.v); return chain(a, e, e); }
template <std::size_t K> Dual<K> sin(const Dual<K>& a) { return chain(a, std::sin(a.v), std::cos(a.v)); }
template <std::size_t K> Dual<K> cos(const Dual<K>& a) { return chain(a, std::cos(a.v), -std::sin(a.v)); }
template <std::size_t K> Dual<K> sqrt(const Dual<K>& a) { const double s = std::sqrt(a.v); return chain(a, s, 0.5 / s); }

inline double value_of(double x) { return x; }
template <std::size_t K> double value_of(const Dual<K>& x) { return x.v; }

/// Index of the packed Hessian entry (i, k) for three variables.
/// Order: (0,0) (0,1) (0,2) (1,1) (1,2) (2,2).
constexpr std::size_t packed_index(std::size_t i, std::size_t k) {
    if (i > k) { const std::size_t t = i; i = k; k = t; }
    constexpr std::size_t base[3] = {0, 3, 5};
    return base[i] + (k - i);
}

template <class S>
struct Jet {
    S v{};
    std::array<S, 3> g{};
    std::array<S, 6> h{};

    Jet() = default;
    explicit Jet(double value) : v(value) {}

    static Jet constant(S value) {
        Jet j;
        j.v = value;
        return j;
    }
    static Jet variable(double value, std::size_t axis) {
        Jet j;
        j.v = S(value);
        j.g[axis] = S(1.0);
        return j;
    }

    S& hess(std::size_t i, std::size_t k) { return h[packed_index(i, k)]; }
    const S& hess(std::size_t i, std::size_t k) const { return h[packed_index(i, k)]; }
};

template <class S>
Jet<S> operator+(const Jet<S>& a, const Jet<S>& b) {
    Jet<S> o;
    o.v = a.v + b.v;
    for (std::size_t i = 0; i < 3; ++i) o.g[i] = a.g[i] + b.g[i];
    for (std::size_t i = 0; i < 6; ++i) o.h[i] = a.h[i] + b.h[i];
    return o;
}

template <class S>
Jet<S> operator-(const Jet<S>& a, const Jet<S>& b) {
    Jet<S> o;
    o.v = a.v - b.v;
    for (std::size_t i = 0; i < 3; ++i) o.g[i] = a.g[i] - b.g[i];
    for (std::size_t i = 0; i < 6; ++i) o.h[i] = a.h[i] - b.h[i];
    return o;
}

template <class S>
Jet<S> operator*(const Jet<S>& a, const Jet<S>& b) {
    Jet<S> o;
    o.v = a.v * b.v;
    for (std::size_t i = 0; i < 3; ++i) o.g[i] = a.g[i] * b.v + a.v * b.g[i];
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t k = i; k < 3; ++k) {
            const std::size_t p = packed_index(i, k);
            o.h[p] = a.h[p] * b.v + a.g[i] * b.g[k] + a.g[k] * b.g[i] + a.v * b.h[p];
        }
    }
    return o;
}

template <class S>
Jet<S> operator*(const Jet<S>& a, double c) {
    Jet<S> o;
    o.v = a.v * c;
    for (std::size_t i = 0; i < 3; ++i) o.g[i] = a.g[i] * c;
    for (std::size_t i = 0; i < 6; ++i) o.h[i] = a.h[i] * c;
    return o;
}
template <class S> Jet<S> operator*(double c, const Jet<S>& a) { return a * c; }
template <class S> Jet<S> operator-(const Jet<S>& a) { return a * -1.0; }
template <class S>
Jet<S> operator+(const Jet<S>& a, double c) {
    Jet<S> o = a;
    o.v = o.v + c;
    return o;
}
template <class S> Jet<S> operator+(double c, const Jet<S>& a) { return a + c; }
template <class S> Jet<S> operator-(const Jet<S>& a, double c) { return a + (-c); }
template <class S> Jet<S> operator-(double c, const Jet<S>& a) { return (-a) + c; }

/// Composition f(a) given f, f' and f'' evaluated at a.v.
template <class S>
Jet<S> compose(const Jet<S>& a, const S& f, const S& df, const S& ddf) {
    Jet<S> o;
    o.v = f;
    for (std::size_t i = 0; i < 3; ++i) o.g[i] = df * a.g[i];
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t k = i; k < 3; ++k) {
            const std::size_t p = packed_index(i, k);
            o.h[p] = ddf * a.g[i] * a.g[k] + df * a.h[p];
        }
    }
    return o;
}

template <class S>
Jet<S> exp(const Jet<S>& a) {
    using std::exp;
    const S e = exp(a.v);
    return compose(a, e, e, e);
}
template <class S>
Jet<S> sin(const Jet<S>& a) {
    using std::sin;
    using std::cos;
    const S s = sin(a.v);
    return compose(a, s, S(cos(a.v)), S(-s));
}
template <class S>
Jet<S> cos(const Jet<S>& a) {
    using std::sin;
    using std::cos;
    const S c = cos(a.v);
    return compose(a, c, S(-sin(a.v)), S(-c));
}
template <class S>
Jet<S> sqrt(const Jet<S>& a) {
    using std::sqrt;
    const S s = sqrt(a.v);
    const S ds = S(0.5) / s;
    return compose(a, s, ds, S(-0.5) * ds / a.v);
}
template <class S>
Jet<S> reciprocal(const Jet<S>& a) {
    const S inv = S(1.0) / a.v;
    return compose(a, inv, S(-1.0) * inv * inv, S(2.0) * inv * inv * inv);
}
template <class S> Jet<S> operator/(const Jet<S>& a, const Jet<S>& b) { return a * reciprocal(b); }
template <class S> Jet<S> operator/(const Jet<S>& a, double c) { return a * (1.0 / c); }

/// Real power; the base must be positive unless the exponent is a small integer.
template <class S>
Jet<S> pow(const Jet<S>& a, double p) {
    using std::pow;
    const S f = pow(a.v, p);
    const S df = S(p) * pow(a.v, p - 1.0);
    const S ddf = S(p * (p - 1.0)) * pow(a.v, p - 2.0);
    return compose(a, f, df, ddf);
}

}  // namespace slpinn
