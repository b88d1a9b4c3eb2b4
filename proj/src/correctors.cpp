#include "slpinn/correctors.hpp"

#include <cmath>
#include <sstream>

#include "slpinn/error.hpp"

namespace slpinn {

CutoffValue cutoff_eval(const CutoffFn& c, double eta) {
    if (!(eta >= -1e-12 && eta <= c.R * (1.0 + 1e-12))) {
        std::ostringstream os;
        os << "cut-off argument " << eta << " outside [0, " << c.R << "]";
        throw DomainError(os.str());
    }
    const double a = c.plateau_end();
    const double b = c.support_end();
    if (eta <= a) return {1.0, 0.0, 0.0};
    if (eta >= b) return {0.0, 0.0, 0.0};
    const double w = b - a;
    const double u = (eta - a) / w;
    const double u2 = u * u;
    const double delta = 1.0 - u2 * u * (10.0 - 15.0 * u + 6.0 * u2);
    const double d1 = -30.0 * u2 * (1.0 - 2.0 * u + u2) / w;
    const double d2 = -60.0 * u * (1.0 - 3.0 * u + 2.0 * u2) / (w * w);
    return {delta, d1, d2};
}

Jet<double> corrector_factor(const DomainSpec& d, double eps, const Point& p) {
    if (!(eps > 0.0)) throw DomainError("epsilon must be positive");
    if (d.kind == DomainKind::Channel) {
        const double expo = -p[1] / eps;
        if (expo < kUnderflowExponent) return Jet<double>{};
        const auto y = Jet<double>::variable(p[1], 1);
        return exp(y * (-1.0 / eps));
    }
    if (!in_lower_half(p[1])) return Jet<double>{};
    const double k = d.corrector_rate();
    const double expo = k * std::sin(p[1]) * p[0] / eps;
    if (expo < kUnderflowExponent) return Jet<double>{};
    const CutoffValue cv = cutoff_eval(CutoffFn{d.R}, p[0]);
    if (cv.delta == 0.0 && cv.d1 == 0.0 && cv.d2 == 0.0) return Jet<double>{};
    const auto eta = Jet<double>::variable(p[0], 0);
    const auto tau = Jet<double>::variable(p[1], 1);
    const auto delta = compose(eta, cv.delta, cv.d1, cv.d2);
    return exp(sin(tau) * eta * (k / eps)) * delta;
}

Jet<double> regularizer_C(const DomainSpec& d, const Point& p) {
    if (d.kind == DomainKind::Channel) {
        throw NotApplicable("the channel uses explicit masks instead of a regularizer");
    }
    const auto eta = Jet<double>::variable(p[0], 0);
    const auto tau = Jet<double>::variable(p[1], 1);
    const auto rho = (d.R - eta) * (1.0 / d.R);
    auto C = 1.0 - rho * rho * rho;
    if (in_lower_half(p[1])) {
        const auto rs = rho * sin(tau);
        C = C - rs * rs * rs;
    }
    return C;
}

Jet<double> baseline_mask(const DomainSpec& d, const Point& p) {
    if (d.kind == DomainKind::Channel) {
        throw NotApplicable("the channel uses explicit masks instead of a regularizer");
    }
    const auto rho = (d.R - Jet<double>::variable(p[0], 0)) * (1.0 / d.R);
    return 1.0 - rho * rho * rho;
}

Point trace_point(const AnsatzSpec& spec, const Point& p) {
    Point q = p;
    q[spec.domain.normal_axis()] = 0.0;
    return q;
}

AnsatzGeometry ansatz_geometry(const AnsatzSpec& spec, const Point& p) {
    const DomainSpec& d = spec.domain;
    AnsatzGeometry g;
    if (d.kind == DomainKind::Channel) {
        if (spec.time_mask) throw NotApplicable("the channel problem has no time variant");
        const auto x = Jet<double>::variable(p[0], 0);
        const auto y = Jet<double>::variable(p[1], 1);
        const auto xx = x * (x - 1.0);
        if (spec.kind == AnsatzKind::Baseline) {
            g.P = xx * y * (1.0 - y);
            return g;
        }
        g.P = xx * (y - 1.0);
        g.Q = xx * corrector_factor(d, spec.epsilon, p);
        g.uses_trace = true;
        return g;
    }
    // Without the corrector the layer-side branch of C does not vanish at
    // eta = 0, so the baseline uses the radial factor 1 - rho^3 throughout.
    Jet<double> mC = spec.kind == AnsatzKind::SingularLayer ? regularizer_C(d, p) : baseline_mask(d, p);
    if (spec.time_mask) mC = (exp(Jet<double>::variable(p[2], 2)) - 1.0) * mC;
    g.P = mC;
    if (spec.kind == AnsatzKind::SingularLayer) {
        g.Q = -(mC * corrector_factor(d, spec.epsilon, p));
        g.uses_trace = true;
    }
    return g;
}

Point network_input(const DomainSpec& domain, const Point& p, int input_dim) {
    const auto xy = to_cartesian(domain, p);
    Point in{xy[0], xy[1], 0.0};
    if (input_dim == 3) in[2] = p[2];
    return in;
}

Jet<double> assemble_ansatz(const AnsatzSpec& spec, const NetworkParams& params, const Point& p) {
    if (spec.time_mask != (params.input_dim == 3)) {
        throw DimensionError("time problems need a 3-input network, steady problems a 2-input one");
    }
    const AnsatzGeometry geo = ansatz_geometry(spec, p);
    const Point tp = trace_point(spec, p);
    const CoordinateMap map = coordinate_map(spec.domain, p);
    const CoordinateMap tmap = coordinate_map(spec.domain, tp);
    const auto in = network_input(spec.domain, p, params.input_dim);
    const auto tin = network_input(spec.domain, tp, params.input_dim);
    const BundleVector b = eval_network(params, std::span<const double>(in.data(), params.input_dim)).flat();
    const BundleVector bt = eval_network(params, std::span<const double>(tin.data(), params.input_dim)).flat();
    return combine_ansatz<double>(spec, geo, map, tmap, b, bt);
}

}  // namespace slpinn
