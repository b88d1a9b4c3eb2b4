#include "slpinn/domains.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "slpinn/error.hpp"

namespace slpinn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kRangeSlack = 1e-12;

void check_point(const DomainSpec& d, const Point& p) {
    if (d.is_polar()) {
        if (!(p[0] >= -kRangeSlack && p[0] <= d.R * (1.0 + kRangeSlack))) {
            std::ostringstream os;
            os << "eta=" << p[0] << " outside [0, " << d.R << "]";
            throw DomainError(os.str());
        }
        if (!(p[1] >= -kRangeSlack && p[1] <= kTwoPi + kRangeSlack)) {
            std::ostringstream os;
            os << "tau=" << p[1] << " outside [0, 2pi]";
            throw DomainError(os.str());
        }
    } else {
        for (int i = 0; i < 2; ++i) {
            if (!(p[i] >= -kRangeSlack && p[i] <= 1.0 + kRangeSlack)) {
                std::ostringstream os;
                os << "channel coordinate " << p[i] << " outside [0, 1]";
                throw DomainError(os.str());
            }
        }
    }
}

void check_singular(const DomainSpec& d, const Point& p) {
    if (d.kind == DomainKind::Circle && 1.0 - p[0] < 1e-6) {
        throw SingularPoint("circle point too close to the centre (1 - eta < 1e-6)");
    }
    if (d.is_ellipse() && metric_H(d, p) < 1e-12) {
        throw SingularPoint("ellipse point on the focal segment (H < 1e-12)");
    }
}

}  // namespace

DomainSpec DomainSpec::channel() { return DomainSpec{}; }

DomainSpec DomainSpec::circle() {
    DomainSpec d;
    d.kind = DomainKind::Circle;
    return d;
}

DomainSpec DomainSpec::ellipse(double A, double B) {
    DomainSpec d;
    d.kind = A > B ? DomainKind::EllipseXMajor : DomainKind::EllipseYMajor;
    const EllipticParameters ep = elliptic_parameters(A, B, d.kind);
    d.A = A;
    d.B = B;
    d.a = ep.a;
    d.R = ep.R;
    return d;
}

double DomainSpec::corrector_rate() const { return is_ellipse() ? A : 1.0; }

std::string DomainSpec::name() const {
    std::ostringstream os;
    switch (kind) {
        case DomainKind::Channel: return "channel";
        case DomainKind::Circle: return "circle";
        case DomainKind::EllipseXMajor: os << "ellipse_x_major(" << A << "," << B << ")"; break;
        case DomainKind::EllipseYMajor: os << "ellipse_y_major(" << A << "," << B << ")"; break;
    }
    return os.str();
}

EllipticParameters elliptic_parameters(double A, double B, DomainKind orientation) {
    if (!(A > 0.0) || !(B > 0.0)) throw DomainError("semi-axes must be positive");
    if (A == B) throw DomainError("A == B is a disk; use the Circle domain kind");
    if (orientation == DomainKind::EllipseXMajor) {
        if (!(A > B)) throw DomainError("x-major ellipse requires A > B");
        return {std::sqrt(A * A - B * B), std::atanh(B / A)};
    }
    if (orientation == DomainKind::EllipseYMajor) {
        if (!(B > A)) throw DomainError("y-major ellipse requires B > A");
        return {std::sqrt(B * B - A * A), std::atanh(A / B)};
    }
    throw DomainError("orientation must be an ellipse kind");
}

bool in_lower_half(double tau) {
    const double t = tau - kTwoPi * std::floor(tau / kTwoPi);
    return t == 0.0 || t >= std::numbers::pi;
}

CoordinateMap coordinate_map(const DomainSpec& d, const Point& p) {
    check_point(d, p);
    CoordinateMap m;
    m.input[2] = Jet<double>::variable(p[2], 2);
    if (d.kind == DomainKind::Channel) {
        m.input[0] = Jet<double>::variable(p[0], 0);
        m.input[1] = Jet<double>::variable(p[1], 1);
        return m;
    }
    const auto eta = Jet<double>::variable(p[0], 0);
    const auto tau = Jet<double>::variable(p[1], 1);
    if (d.kind == DomainKind::Circle) {
        const auto r = 1.0 - eta;
        m.input[0] = r * cos(tau);
        m.input[1] = r * sin(tau);
        return m;
    }
    const auto xi = d.R - eta;
    const auto ex = exp(xi);
    const auto emx = exp(-xi);
    const auto ch = (ex + emx) * 0.5;
    const auto sh = (ex - emx) * 0.5;
    if (d.kind == DomainKind::EllipseXMajor) {
        m.input[0] = d.a * ch * cos(tau);
        m.input[1] = d.a * sh * sin(tau);
    } else {
        m.input[0] = d.a * sh * cos(tau);
        m.input[1] = d.a * ch * sin(tau);
    }
    return m;
}

std::array<double, 2> to_cartesian(const DomainSpec& d, const Point& p) {
    check_point(d, p);
    switch (d.kind) {
        case DomainKind::Channel: return {p[0], p[1]};
        case DomainKind::Circle: return {(1.0 - p[0]) * std::cos(p[1]), (1.0 - p[0]) * std::sin(p[1])};
        case DomainKind::EllipseXMajor:
            return {d.a * std::cosh(d.R - p[0]) * std::cos(p[1]), d.a * std::sinh(d.R - p[0]) * std::sin(p[1])};
        case DomainKind::EllipseYMajor:
            return {d.a * std::sinh(d.R - p[0]) * std::cos(p[1]), d.a * std::cosh(d.R - p[0]) * std::sin(p[1])};
    }
    return {0.0, 0.0};
}

double metric_H(const DomainSpec& d, const Point& p) {
    if (d.kind == DomainKind::Channel) throw NotApplicable("metric_H is undefined for the channel");
    check_point(d, p);
    if (d.kind == DomainKind::Circle) return (1.0 - p[0]) * (1.0 - p[0]);
    const double xi = d.R - p[0];
    const double first = d.kind == DomainKind::EllipseXMajor ? std::sinh(xi) : std::cosh(xi);
    const double second = d.kind == DomainKind::EllipseXMajor ? std::cosh(xi) : std::sinh(xi);
    const double u = d.a * first * std::cos(p[1]);
    const double v = d.a * second * std::sin(p[1]);
    return u * u + v * v;
}

std::vector<std::string> SampleGrid::coordinate_names() const {
    if (!domain.is_polar()) return {"x", "y"};
    if (time) return {"eta", "tau", "t"};
    return {"eta", "tau"};
}

void SampleGrid::write_csv(std::ostream& os) const {
    const auto names = coordinate_names();
    for (const auto& n : names) os << n << ',';
    if (domain.is_polar()) {
        os << "x,y\n";
    } else {
        os << "x_cart,y_cart\n";
    }
    os.precision(17);
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t k = 0; k < names.size(); ++k) os << points[i][k] << ',';
        os << cartesian[i][0] << ',' << cartesian[i][1] << '\n';
    }
}

SampleGrid custom_grid(const DomainSpec& domain, std::vector<Point> points, bool time) {
    SampleGrid g;
    g.domain = domain;
    g.time = time;
    g.points = std::move(points);
    g.cartesian.reserve(g.points.size());
    for (const Point& p : g.points) {
        check_singular(domain, p);
        g.cartesian.push_back(to_cartesian(domain, p));
    }
    return g;
}

SampleGrid uniform_grid(const DomainSpec& domain, int n_eta, int n_tau, int n_t, double T) {
    if (n_eta < 2 || n_tau < 2) throw DomainError("grid counts must be >= 2");
    const bool time = n_t > 0;
    if (time && n_t < 2) throw DomainError("time grid needs n_t >= 2");
    if (time && !domain.is_polar()) throw NotApplicable("time grids are defined for the circle");
    if (time && !(T > 0.0)) throw DomainError("final time must be positive");

    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>(n_eta) * n_tau * (time ? n_t : 1));
    const int nt = time ? n_t : 1;
    for (int k = 0; k < nt; ++k) {
        const double t = time ? T * k / (n_t - 1) : 0.0;
        for (int j = 0; j < n_tau; ++j) {
            for (int i = 0; i < n_eta; ++i) {
                if (domain.is_polar()) {
                    pts.push_back({domain.R * (i + 0.5) / n_eta, kTwoPi * (j + 0.5) / n_tau, t});
                } else {
                    pts.push_back({(j + 0.5) / n_tau, (i + 0.5) / n_eta, 0.0});
                }
            }
        }
    }
    SampleGrid g = custom_grid(domain, std::move(pts), time);
    g.n_eta = n_eta;
    g.n_tau = n_tau;
    g.n_t = time ? n_t : 0;
    g.T = T;
    return g;
}

RegionSplit split_layer_region(const SampleGrid& grid) {
    if (!grid.domain.is_polar()) throw NotApplicable("region split needs a circle or ellipse grid");
    RegionSplit s;
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
        (in_lower_half(grid.points[i][1]) ? s.lower : s.upper).push_back(i);
    }
    return s;
}

}  // namespace slpinn
