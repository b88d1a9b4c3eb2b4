#include "slpinn/residuals.hpp"

#include <sstream>

#include "slpinn/error.hpp"

namespace slpinn {

namespace {

void check_interior(const ProblemSpec& pb, const Point& p) {
    if (pb.domain.kind == DomainKind::Circle && 1.0 - p[0] < 1e-6) {
        throw SingularPoint("operator evaluated at the circle centre");
    }
    if (pb.domain.is_ellipse() && metric_H(pb.domain, p) < 1e-12) {
        throw SingularPoint("operator evaluated on the ellipse focal segment");
    }
}

// Everything the hand expansions need at one point.
struct Pieces {
    Jet<double> V;   // network pulled back at the point
    Jet<double> T;   // trace, normal derivatives removed
    Jet<double> C;   // regularizer (circle/ellipse)
    CutoffValue del{0.0, 0.0, 0.0};
    double E = 0.0;  // exp(k sin(tau) eta / eps) on the lower half, else 0
    bool lower = false;
    double m = 1.0;   // time mask e^t - 1
    double em = 0.0;  // its derivative e^t
};

Pieces gather(const ProblemSpec& pb, const NetworkParams& params, const Point& p) {
    const AnsatzSpec spec = make_ansatz_spec(pb, AnsatzKind::SingularLayer);
    Pieces out;
    const Point tp = trace_point(spec, p);
    const auto in = network_input(pb.domain, p, params.input_dim);
    const auto tin = network_input(pb.domain, tp, params.input_dim);
    const auto b = eval_network(params, std::span<const double>(in.data(), params.input_dim)).flat();
    const auto bt = eval_network(params, std::span<const double>(tin.data(), params.input_dim)).flat();
    out.V = pullback(b, coordinate_map(pb.domain, p));
    out.T = strip_normal(pullback(bt, coordinate_map(pb.domain, tp)), pb.domain.normal_axis());
    if (pb.domain.is_polar()) {
        out.C = regularizer_C(pb.domain, p);
        out.del = cutoff_eval(CutoffFn{pb.domain.R}, p[0]);
        out.lower = in_lower_half(p[1]);
        const double expo = pb.domain.corrector_rate() * std::sin(p[1]) * p[0] / pb.epsilon;
        if (out.lower && expo >= kUnderflowExponent) out.E = std::exp(expo);
        if (pb.is_time()) {
            out.em = std::exp(p[2]);
            out.m = out.em - 1.0;
        }
    }
    return out;
}

double forcing_at(const ProblemSpec& pb, const Point& p) {
    const auto xy = to_cartesian(pb.domain, p);
    return pb.forcing(xy[0], xy[1], pb.is_time() ? p[2] : 0.0);
}

ExpandedResidual finish(std::vector<ExpansionTerm> terms) {
    ExpandedResidual r;
    r.terms = std::move(terms);
    for (const auto& t : r.terms) r.total += t.value;
    return r;
}

// ---------------------------------------------------------------------------
// Channel: the verbatim expansion agrees with the re-derived one.

ExpandedResidual channel_expansion(const ProblemSpec& pb, const Pieces& q, const Point& p) {
    const double e = pb.epsilon;
    const double x = p[0];
    const double y = p[1];
    const double X = x * x - x;
    const double expo = -y / e;
    const double phi = expo < kUnderflowExponent ? 0.0 : std::exp(expo);
    const Jet<double>& U = q.V;
    const Jet<double>& T = q.T;
    std::vector<ExpansionTerm> t;
    t.push_back({"u", -2.0 * e * (y - 1.0) * U.v - X * U.v});
    t.push_back({"u_x", -2.0 * e * (2.0 * x - 1.0) * (y - 1.0) * U.g[0]});
    t.push_back({"u_y", -2.0 * e * X * U.g[1] - X * (y - 1.0) * U.g[1]});
    t.push_back({"u_laplacian", -e * X * (y - 1.0) * (U.hess(0, 0) + U.hess(1, 1))});
    t.push_back({"trace", -2.0 * e * T.v * phi});
    t.push_back({"trace_x", -2.0 * e * (2.0 * x - 1.0) * T.g[0] * phi});
    t.push_back({"trace_xx", -e * X * T.hess(0, 0) * phi});
    t.push_back({"rhs", -forcing_at(pb, p)});
    return finish(std::move(t));
}

// ---------------------------------------------------------------------------
// Circle (steady, time and cubic variants).

struct CircleVTerms {
    double vtt, vt, vee, ve, v;
};

CircleVTerms circle_vterms_corrected(double e, const Jet<double>& C, double eta, double tau) {
    const double rho = 1.0 - eta;
    const double s = std::sin(tau);
    const double c = std::cos(tau);
    const double Ce = C.g[0], Ct = C.g[1], Cee = C.hess(0, 0), Ctt = C.hess(1, 1);
    return {-e * C.v / (rho * rho),
            -2.0 * e * Ct / (rho * rho) - c * C.v / rho,
            -e * C.v,
            e * C.v / rho - 2.0 * e * Ce + s * C.v,
            -e * Ctt / (rho * rho) + e * Ce / rho - e * Cee + s * Ce - c * Ct / rho};
}

CircleVTerms circle_vterms_verbatim(double e, double eta, double tau, bool lower, bool time) {
    const double r = 1.0 - eta;
    const double s = std::sin(tau);
    const double c = std::cos(tau);
    if (!lower) {
        return {-e * (1.0 / (r * r) - r), (r * r - 1.0 / r) * c, -e * (1.0 - r * r * r),
                -(6.0 * e + e * r * r - e / r - s * (1.0 - r * r * r)),
                3.0 * e + 6.0 * e / r + 3.0 * r * r * s};
    }
    const double s3 = s * s * s;
    const double ve_inner = 6.0 * e + e * r * r - e / r + 7.0 * e * r * r * s3 + r * r * r * s3 - (1.0 - r * r * r) * s;
    return {-e * (1.0 / (r * r) - r - r * s3),
            6.0 * e * r * s * s * c + (r * r - 1.0 / r + r * r * s3) * c,
            -e * (1.0 - r * r * r - r * r * r * s3),
            time ? ve_inner : -ve_inner,
            3.0 * e + 6.0 * e / r + 6.0 * e * r * s + 6.0 * r * r * s};
}

ExpandedResidual circle_expansion(const ProblemSpec& pb, const Pieces& q, const Point& p, ExpansionReading reading) {
    const double e = pb.epsilon;
    const double eta = p[0];
    const double tau = p[1];
    const double rho = 1.0 - eta;
    const double s = std::sin(tau);
    const double c = std::cos(tau);
    const bool time = pb.is_time();
    const bool verbatim = reading == ExpansionReading::Verbatim;
    const Jet<double>& V = q.V;
    const Jet<double>& T = q.T;
    const Jet<double>& C = q.C;
    const double Ce = C.g[0], Ct = C.g[1], Cee = C.hess(0, 0), Ctt = C.hess(1, 1);
    const double d = q.del.delta, dp = q.del.d1, dpp = q.del.d2;
    const double E = q.E;
    const double m = q.m;

    const CircleVTerms k = verbatim ? circle_vterms_verbatim(e, eta, tau, q.lower, time)
                                    : circle_vterms_corrected(e, C, eta, tau);
    std::vector<ExpansionTerm> t;
    t.push_back({"v_tautau", m * k.vtt * V.hess(1, 1)});
    t.push_back({"v_tau", m * k.vt * V.g[1]});
    t.push_back({"v_etaeta", m * k.vee * V.hess(0, 0)});
    t.push_back({"v_eta", m * k.ve * V.g[0]});
    t.push_back({"v", m * k.v * V.v});

    if (time) {
        double value;
        if (verbatim) {
            value = q.lower ? (q.em * V.v + m * V.g[2] - (q.em * T.v + m * T.g[2])) * E * C.v
                            : (q.em * V.v + m * V.g[2]) * C.v;
        } else {
            const double phi = E * d;
            value = q.em * (V.v - T.v * phi) * C.v + m * (V.g[2] - T.g[2] * phi) * C.v;
        }
        t.push_back({"time", value});
    }

    double trace_eta = 0.0;
    double trace_tau = 0.0;
    double psi = 0.0;
    if (q.lower && E != 0.0) {
        const double Tt = T.g[1], Ttt = T.hess(1, 1);
        if (!verbatim) {
            trace_eta = m * T.v * E *
                        (e * (dpp * C.v + 2.0 * dp * Ce + d * Cee) + s * dp * C.v + s * d * Ce - s * d * C.v / rho -
                         e * dp * C.v / rho - e * d * Ce / rho);
            trace_tau = m * d * E / (rho * rho) *
                        ((e * Ttt + (1.0 + eta) * c * Tt - eta * s * T.v) * C.v +
                         (2.0 * e * Tt + (1.0 + eta) * c * T.v) * Ct + e * T.v * Ctt);
        } else if (!time) {
            trace_eta = -T.v * (e * (C.v * dpp - (rho * C.v - 2.0 * Ce) * dp - (rho * Ce - Cee) * d) -
                                C.v * s * dp + Ce * s * d) * E;
            trace_tau = d / (rho * rho) *
                        ((e * Ttt + (1.0 + eta) * c * Tt - eta * s * T.v) * C.v +
                         (2.0 * e * Tt + (1.0 + eta) * c * T.v) * Ct + e * T.v * Ctt) * E;
        } else {
            trace_eta = T.v * (e * (C.v * dpp + (rho * C.v + 2.0 * Ce) * dp - (rho * Ce + Cee) * d) -
                               C.v * s * dp + Ce * s * d) * E;
            trace_tau = d / (rho * rho) *
                        ((e * Ttt + (2.0 + eta) * c * Tt - eta * s * T.v) * C.v +
                         (2.0 * e * Tt + (1.0 + eta) * c * T.v) * Ct + e * T.v * Ctt) * E;
        }
        psi = m * C.v * T.v * d / (rho * rho) * (eta * c * c / e) * E;
    }
    t.push_back({"trace_eta", trace_eta});
    t.push_back({"trace_tau", trace_tau});
    t.push_back({"psi", psi});

    if (pb.variant == Variant::NonlinearCubic) {
        const double vt = (V.v - T.v * E * d) * C.v;
        t.push_back({"cubic", vt * vt * vt});
    }
    t.push_back({"rhs", -forcing_at(pb, p)});
    return finish(std::move(t));
}

// ---------------------------------------------------------------------------
// Ellipses.

ExpandedResidual ellipse_expansion(const ProblemSpec& pb, const Pieces& q, const Point& p, ExpansionReading reading) {
    const DomainSpec& dom = pb.domain;
    const double e = pb.epsilon;
    const double eta = p[0];
    const double tau = p[1];
    const double s = std::sin(tau);
    const double c = std::cos(tau);
    const double xi = dom.R - eta;
    const bool xmaj = dom.kind == DomainKind::EllipseXMajor;
    const double alpha = dom.a * (xmaj ? std::cosh(xi) : std::sinh(xi)) * s;
    const double beta = dom.a * (xmaj ? std::sinh(xi) : std::cosh(xi)) * c;
    const double A = dom.A;
    const double kk = A * s;
    const bool verbatim = reading == ExpansionReading::Verbatim;
    const Jet<double>& V = q.V;
    const Jet<double>& T = q.T;
    const Jet<double>& C = q.C;
    const double Ce = C.g[0], Ct = C.g[1], Cee = C.hess(0, 0), Ctt = C.hess(1, 1);
    const double d = q.del.delta, dp = q.del.d1, dpp = q.del.d2;
    const double E = q.E;

    double vee = -e * C.v, vtt = -e * C.v;
    double ve = -2.0 * e * Ce + alpha * C.v;
    double vt = -2.0 * e * Ct - beta * C.v;
    double vv = -e * (Cee + Ctt) + alpha * Ce - beta * Ct;
    if (verbatim && !q.lower) {
        // Verbatim upper-half forms with C = 1 - rho^3 written out.
        const double R = dom.R;
        const double Cu = 1.0 - std::pow(xi / R, 3);
        const double Cu_e = 3.0 * xi * xi / (R * R * R);
        const double Cu_ee = -6.0 * xi / (R * R * R);
        vee = -e * Cu;
        vtt = -e * Cu;
        vt = -beta * Cu;
        // -eps(... - 2 v_eta (-3 xi^2/R^3) ...) then -/+ alpha (v_eta Cu + v (-/+ 3 xi^2/R^3)).
        ve = -2.0 * e * Cu_e + (xmaj ? -alpha : alpha) * Cu;
        vv = -e * Cu_ee + alpha * Cu_e;
    }
    std::vector<ExpansionTerm> t;
    t.push_back({"v_tautau", vtt * V.hess(1, 1)});
    t.push_back({"v_tau", vt * V.g[1]});
    t.push_back({"v_etaeta", vee * V.hess(0, 0)});
    t.push_back({"v_eta", ve * V.g[0]});
    t.push_back({"v", vv * V.v});

    double trace_eta = 0.0;
    double trace_tau = 0.0;
    double psi = 0.0;
    if (q.lower && E != 0.0) {
        const double Tt = T.g[1], Ttt = T.hess(1, 1);
        const double bracket = kk * kk - alpha * kk + (A * eta * c) * (A * eta * c) + beta * A * eta * c;
        psi = T.v / e * d * C.v * bracket * E;
        if (!verbatim) {
            trace_eta = e * T.v * E * (dpp * C.v + 2.0 * dp * Ce + d * Cee) +
                        T.v * E * (2.0 * kk * dp * C.v + 2.0 * kk * d * Ce - alpha * dp * C.v - alpha * d * Ce);
            trace_tau = d * E *
                        (e * Ttt * C.v + 2.0 * Tt * A * eta * c * C.v + 2.0 * e * Tt * Ct - T.v * A * eta * s * C.v +
                         2.0 * T.v * A * eta * c * Ct + e * T.v * Ctt + beta * Tt * C.v + beta * T.v * Ct);
        } else {
            const double verbatim_alpha = xmaj ? dom.a * std::cosh(xi) * s : -dom.a * std::cosh(xi) * s;
            trace_eta = e * T.v * (dpp * C.v + 2.0 * dp * Ce + d * Cee) * E +
                        T.v * (2.0 * A * s * dp * C.v + 2.0 * A * s * d * Ce) * E +
                        verbatim_alpha * T.v * (dp * C.v + d * Ce) * E;
            trace_tau = e * d * (V.hess(1, 1) * C.v + 2.0 * V.g[1] * Ct + V.v * Ctt) * E -
                        d * (A * eta * ((s * V.v - 2.0 * c * V.g[1]) * C.v - 2.0 * (c * V.v) * Ct)) * E;
        }
    }
    t.push_back({"trace_eta", trace_eta});
    t.push_back({"trace_tau", trace_tau});
    t.push_back({"psi", psi});
    const double rhs = verbatim ? forcing_at(pb, p) : rhs_value(pb, p);
    t.push_back({"rhs", -rhs});
    return finish(std::move(t));
}

}  // namespace

void ProblemSpec::validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw DomainError("epsilon must be positive and finite");
    if (!forcing) throw DomainError("problem has no forcing");
    if (variant == Variant::TimeDependent) {
        if (domain.kind != DomainKind::Circle) throw NotApplicable("the time-dependent variant is defined on the circle");
        if (!(T > 0.0)) throw DomainError("final time must be positive");
    }
    if (variant == Variant::NonlinearCubic && domain.kind != DomainKind::Circle) {
        throw NotApplicable("the cubic variant is defined on the circle");
    }
}

AnsatzSpec make_ansatz_spec(const ProblemSpec& problem, AnsatzKind kind) {
    AnsatzSpec s;
    s.domain = problem.domain;
    s.kind = kind;
    s.epsilon = problem.epsilon;
    s.time_mask = problem.is_time();
    return s;
}

double rhs_value(const ProblemSpec& pb, const Point& p) {
    const double f = forcing_at(pb, p);
    if (pb.domain.is_ellipse() && pb.rhs == RhsConvention::HF) return metric_H(pb.domain, p) * f;
    return f;
}

double apply_operator(const ProblemSpec& pb, const NetworkParams& params, const AnsatzSpec& spec, const Point& p) {
    check_interior(pb, p);
    const Jet<double> v = assemble_ansatz(spec, params, p);
    return apply_operator_jet(pb, v, p, true) - rhs_value(pb, p);
}

double ExpandedResidual::term(const std::string& name) const {
    for (const auto& t : terms) {
        if (t.name == name) return t.value;
    }
    throw DomainError("no expansion term named " + name);
}

ExpandedResidual expanded_residual(const ProblemSpec& pb, const NetworkParams& params, const Point& p,
                                   ExpansionReading reading) {
    pb.validate();
    check_interior(pb, p);
    const Pieces q = gather(pb, params, p);
    switch (pb.domain.kind) {
        case DomainKind::Channel: return channel_expansion(pb, q, p);
        case DomainKind::Circle: return circle_expansion(pb, q, p, reading);
        default: return ellipse_expansion(pb, q, p, reading);
    }
}

double psi_coefficient(const ProblemSpec& pb, const Point& p) {
    const DomainSpec& d = pb.domain;
    if (!d.is_polar()) throw NotApplicable("no dominant term is defined for the channel");
    if (!in_lower_half(p[1])) return 0.0;
    const double e = pb.epsilon;
    const double eta = p[0];
    const double s = std::sin(p[1]);
    const double c = std::cos(p[1]);
    const double expo = d.corrector_rate() * s * eta / e;
    if (expo < kUnderflowExponent) return 0.0;
    const double delta = cutoff_eval(CutoffFn{d.R}, eta).delta;
    if (delta == 0.0) return 0.0;
    const double E = std::exp(expo);
    const double C = regularizer_C(d, p).v;
    if (d.kind == DomainKind::Circle) {
        const double rho = 1.0 - eta;
        double k = C * delta / (rho * rho) * (eta * c * c / e) * E;
        if (pb.is_time()) k *= std::exp(p[2]) - 1.0;
        return k;
    }
    const double xi = d.R - eta;
    const bool xmaj = d.kind == DomainKind::EllipseXMajor;
    const double alpha = d.a * (xmaj ? std::cosh(xi) : std::sinh(xi)) * s;
    const double beta = d.a * (xmaj ? std::sinh(xi) : std::cosh(xi)) * c;
    const double kk = d.A * s;
    const double Aec = d.A * eta * c;
    return delta * C * (kk * kk - alpha * kk + Aec * Aec + beta * Aec) * E / e;
}

double psi_dominant(const ProblemSpec& pb, const NetworkParams& params, const Point& p) {
    const double k = psi_coefficient(pb, p);
    if (k == 0.0) return 0.0;
    const AnsatzSpec spec = make_ansatz_spec(pb, AnsatzKind::SingularLayer);
    const auto tin = network_input(pb.domain, trace_point(spec, p), params.input_dim);
    return k * eval_network(params, std::span<const double>(tin.data(), params.input_dim)).value;
}

ResidualStencil build_stencil(const ProblemSpec& pb, const AnsatzSpec& spec, const Point& p) {
    check_interior(pb, p);
    using D = Dual<2 * kBundleSize>;
    const AnsatzGeometry geo = ansatz_geometry(spec, p);
    const Point tp = trace_point(spec, p);
    const CoordinateMap map = coordinate_map(spec.domain, p);
    const CoordinateMap tmap = coordinate_map(spec.domain, tp);
    std::array<D, kBundleSize> b;
    std::array<D, kBundleSize> bt;
    for (int e = 0; e < kBundleSize; ++e) {
        b[e] = D::variable(0.0, e);
        bt[e] = D::variable(0.0, kBundleSize + e);
    }
    const Jet<D> v = combine_ansatz<D>(spec, geo, map, tmap, b, bt);
    const D r = apply_operator_jet(pb, v, p, false);
    ResidualStencil st;
    for (int e = 0; e < kBundleSize; ++e) {
        st.point[e] = r.d[e];
        st.trace[e] = r.d[kBundleSize + e];
        st.value_point[e] = v.v.d[e];
        st.value_trace[e] = v.v.d[kBundleSize + e];
    }
    st.rhs = rhs_value(pb, p);
    st.uses_trace = geo.uses_trace;
    st.cubic = pb.variant == Variant::NonlinearCubic;
    if (spec.kind == AnsatzKind::SingularLayer && pb.domain.is_polar()) st.psi = psi_coefficient(pb, p);
    return st;
}

}  // namespace slpinn
