#include "slpinn/reference.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "slpinn/correctors.hpp"
#include "slpinn/error.hpp"

namespace slpinn {

namespace {

constexpr double kPi = std::numbers::pi;

double x_extent(const DomainSpec& d) {
    switch (d.kind) {
        case DomainKind::Channel: return 1.0;
        case DomainKind::Circle: return 1.0;
        default: return d.A;
    }
}

void check_x(const DomainSpec& d, double x) {
    const double lo = d.kind == DomainKind::Channel ? 0.0 : -x_extent(d);
    const double hi = x_extent(d);
    if (x < lo - 1e-12 || x > hi + 1e-12) {
        std::ostringstream os;
        os << "x=" << x << " outside the domain's x-range [" << lo << ", " << hi << "]";
        throw DomainError(os.str());
    }
}

}  // namespace

double upper_ordinate(const DomainSpec& d, double x) {
    check_x(d, x);
    switch (d.kind) {
        case DomainKind::Channel: return 1.0;
        case DomainKind::Circle: return std::sqrt(std::max(0.0, 1.0 - x * x));
        default: return d.B * std::sqrt(std::max(0.0, 1.0 - (x / d.A) * (x / d.A)));
    }
}

double lower_ordinate(const DomainSpec& d, double x) {
    return d.kind == DomainKind::Channel ? 0.0 : -upper_ordinate(d, x);
}

double limit_solution(const DomainSpec& d, const ForcingFn& f, double x, double y) {
    const double top = upper_ordinate(d, x);
    const double bottom = lower_ordinate(d, x);
    const double slack = 1e-12 * std::max(1.0, top - bottom);
    if (y < bottom - slack || y > top + slack) {
        std::ostringstream os;
        os << "point (" << x << ", " << y << ") outside the domain";
        throw DomainError(os.str());
    }
    if (y >= top) return 0.0;
    auto g = [&](double s) { return f(x, s, 0.0); };
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(g, y, top, 6, 1e-12, &err);
}

double asymptotic_reference(const ProblemSpec& pb, const Point& p) {
    if (pb.is_time()) throw NotApplicable("the asymptotic reference is defined for steady problems");
    const DomainSpec& d = pb.domain;
    const auto xy = to_cartesian(d, p);
    const double u0 = limit_solution(d, pb.forcing, xy[0], xy[1]);
    if (d.kind == DomainKind::Channel) {
        const double expo = -p[1] / pb.epsilon;
        if (expo < kUnderflowExponent) return u0;
        return u0 - limit_solution(d, pb.forcing, xy[0], 0.0) * std::exp(expo);
    }
    if (!in_lower_half(p[1])) return u0;
    const double expo = d.corrector_rate() * std::sin(p[1]) * p[0] / pb.epsilon;
    if (expo < kUnderflowExponent) return u0;
    const double delta = cutoff_eval(CutoffFn{d.R}, p[0]).delta;
    if (delta == 0.0) return u0;
    const auto b = to_cartesian(d, Point{0.0, p[1], 0.0});
    const double yb = std::min(b[1], upper_ordinate(d, b[0]));
    const double trace = limit_solution(d, pb.forcing, b[0], std::max(yb, lower_ordinate(d, b[0])));
    return u0 - trace * std::exp(expo) * delta;
}

double channel_exact(double eps, double x, double y) {
    if (!(eps > 0.0)) throw DomainError("epsilon must be positive");
    const double k2 = 4.0 * kPi * kPi;
    const double root = std::sqrt(1.0 + 4.0 * k2 * eps * eps);
    const double gp = 1.0 / (k2 * eps);
    const double lp = 2.0 * k2 * eps / (root + 1.0);  // small positive root
    const double lm = (-1.0 - root) / (2.0 * eps);     // large negative root
    const double p = std::exp(-lp);
    const double q = std::exp(lm);
    const double b = std::expm1(-lp) / (1.0 - p * q);
    const double g = -gp * std::expm1(lp * (y - 1.0)) + gp * b * (std::exp(lm * y) - q * std::exp(lp * (y - 1.0)));
    return std::sin(2.0 * kPi * x) * g;
}

double time_circle_exact(double eps, double t, double x, double y) {
    const double r2 = x * x + y * y;
    if (r2 > 1.0 + 1e-12) throw DomainError("point outside the unit disk");
    if (r2 >= 1.0 - 1e-14) return 0.0;
    if (std::abs(x) >= 1.0) throw DomainError("the exact time solution needs |x| < 1");
    return time_circle_exact_generic<double>(eps, t, x, y);
}

ForcingFn time_circle_forcing(double eps) {
    return [eps](double x, double y, double t) {
        const auto X = Jet<double>::variable(x, 0);
        const auto Y = Jet<double>::variable(y, 1);
        const auto Tt = Jet<double>::variable(t, 2);
        const Jet<double> u = time_circle_exact_generic(eps, Tt, X, Y);
        return u.g[2] - eps * (u.hess(0, 0) + u.hess(1, 1)) - u.g[1];
    };
}

double oscillation_exact(double eps, const Expression& amplitude, double x, double y) {
    if (std::abs(x) >= 1.0) throw DomainError("the oscillation solution needs |x| < 1");
    return oscillation_exact_generic<double>(eps, amplitude, x, y);
}

ForcingFn oscillation_forcing(double eps, const Expression& amplitude) {
    return [eps, amplitude](double x, double y, double) {
        const auto X = Jet<double>::variable(x, 0);
        const auto Y = Jet<double>::variable(y, 1);
        const Jet<double> u = oscillation_exact_generic(eps, amplitude, X, Y);
        return -eps * (u.hess(0, 0) + u.hess(1, 1)) - u.g[1];
    };
}

CompatibilityReport compatibility_check(const ForcingFn& f, const DomainSpec& d, double threshold) {
    if (!d.is_polar()) throw NotApplicable("characteristic points are defined for circle and ellipse");
    const double xc = x_extent(d);
    const double h = 1e-4 * xc;
    CompatibilityReport rep;
    rep.threshold = threshold;
    rep.compatible = true;
    for (const double sx : {1.0, -1.0}) {
        CompatibilityPoint cp;
        cp.x = sx * xc;
        cp.y = 0.0;
        auto F = [&](double x, double y) { return f(x, y, 0.0); };
        cp.f = F(cp.x, 0.0);
        double fx = (-F(cp.x + 2 * h, 0) + 8 * F(cp.x + h, 0) - 8 * F(cp.x - h, 0) + F(cp.x - 2 * h, 0)) / (12 * h);
        if (!std::isfinite(fx)) {
            // One-sided fourth-order stencil pointing into the domain.
            const double s = -sx * h;
            fx = (-25 * F(cp.x, 0) + 48 * F(cp.x + s, 0) - 36 * F(cp.x + 2 * s, 0) + 16 * F(cp.x + 3 * s, 0) -
                  3 * F(cp.x + 4 * s, 0)) / (12 * s);
        }
        auto ystencils = [&](double x) {
            const double fy = (-F(x, 2 * h) + 8 * F(x, h) - 8 * F(x, -h) + F(x, -2 * h)) / (12 * h);
            const double fyy = (-F(x, 2 * h) + 16 * F(x, h) - 30 * F(x, 0) + 16 * F(x, -h) - F(x, -2 * h)) / (12 * h * h);
            return std::pair<double, double>(fy, fyy);
        };
        auto [fy, fyy] = ystencils(cp.x);
        if (!std::isfinite(fy) || !std::isfinite(fyy)) std::tie(fy, fyy) = ystencils(cp.x - sx * 4 * h);
        cp.fx = fx;
        cp.fy = fy;
        cp.fyy = fyy;
        cp.compatible = std::isfinite(cp.f) && std::isfinite(fx) && std::isfinite(fy) && std::isfinite(fyy) &&
                        std::abs(cp.f) <= threshold && std::abs(fx) <= threshold && std::abs(fy) <= threshold &&
                        std::abs(fyy) <= threshold;
        rep.compatible = rep.compatible && cp.compatible;
        rep.points.push_back(cp);
    }
    return rep;
}

}  // namespace slpinn
