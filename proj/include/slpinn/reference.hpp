#pragma once

// Reference fields: limit solution by quadrature, asymptotic reference,
// closed-form solutions and the compatibility checker.

#include <string>
#include <vector>

#include "slpinn/autodiff.hpp"
#include "slpinn/domains.hpp"
#include "slpinn/expr.hpp"
#include "slpinn/residuals.hpp"

namespace slpinn {

/// Upper boundary ordinate C_u(x): 1 (channel), sqrt(1-x^2) (circle), B sqrt(1-x^2/A^2) (ellipse).
double upper_ordinate(const DomainSpec& domain, double x);
double lower_ordinate(const DomainSpec& domain, double x);

/// u0(x, y) = integral of f(x, s) for s from y to C_u(x) (adaptive Gauss-Kronrod).
double limit_solution(const DomainSpec& domain, const ForcingFn& f, double x, double y);

/// u0 plus the boundary-layer corrector with trace amplitude -u0 on the outflow boundary.
double asymptotic_reference(const ProblemSpec& problem, const Point& p);

/// Exact solution of the channel problem with f = sin(2 pi x).
double channel_exact(double eps, double x, double y);

template <class S>
S time_circle_exact_generic(double eps, const S& t, const S& x, const S& y) {
    using std::sqrt;
    const S w = S(1.0) - x * x;
    const S sw = sqrt(w);
    return t * w * w * (sw - y + (y + sw) * eps / (w * sw));
}

/// u = t (1-x^2)^2 (sqrt(1-x^2) - y + eps (y + sqrt(1-x^2)) / (1-x^2)^{3/2}), 0 on the boundary.
double time_circle_exact(double eps, double t, double x, double y);

/// Forcing f = u_t - eps Lap u - u_y induced by the exact time solution.
ForcingFn time_circle_forcing(double eps);

template <class S>
S oscillation_exact_generic(double eps, const Expression& amplitude, const S& x, const S& y) {
    using std::exp;
    using std::sqrt;
    const S A = amplitude.evaluate<S>(x, y, S(0.0));
    const S s = sqrt(S(1.0) - x * x);
    const S ys = y + s;
    return S(0.0) - A * ys * (S(1.0) - exp(A * s * (-2.0 / eps))) +
           A * s * 2.0 * (S(1.0) - exp(A * ys * (-1.0 / eps)));
}

double oscillation_exact(double eps, const Expression& amplitude, double x, double y);

/// Forcing -eps Lap u - u_y of the oscillating exact solution (exact differentiation).
ForcingFn oscillation_forcing(double eps, const Expression& amplitude);

struct CompatibilityPoint {
    double x = 0.0;
    double y = 0.0;
    double f = 0.0;
    double fx = 0.0;
    double fy = 0.0;
    double fyy = 0.0;
    bool compatible = false;
};

struct CompatibilityReport {
    std::vector<CompatibilityPoint> points;
    double threshold = 1e-8;
    bool compatible = false;
};

/// f, f_x, f_y, f_yy at the characteristic points (+-x_char, 0) by fourth-order differences.
CompatibilityReport compatibility_check(const ForcingFn& f, const DomainSpec& domain, double threshold = 1e-8);

}  // namespace slpinn
