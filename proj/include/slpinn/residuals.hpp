#pragma once

// Differential operators applied to the ansatz.
//
// apply_operator is the direct path (operator applied to the assembled ansatz
// jet) and the source of truth for training. expanded_residual evaluates the
// hand-expanded formulas term by term, in two readings:
//   Corrected  the expansion re-derived from the operator (should agree with
//              apply_operator to rounding);
//   Verbatim   the original hand expansion taken literally,
//              including their sign/coefficient slips.
// Both readings share the same term names so per-term discrepancies can be
// listed.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "slpinn/autodiff.hpp"
#include "slpinn/correctors.hpp"
#include "slpinn/domains.hpp"
#include "slpinn/net.hpp"

namespace slpinn {

enum class Variant { LinearSteady, TimeDependent, NonlinearCubic };
enum class RhsConvention { F, HF };

using ForcingFn = std::function<double(double x, double y, double t)>;

struct ProblemSpec {
    DomainSpec domain;
    Variant variant = Variant::LinearSteady;
    double epsilon = 1e-6;
    double T = 1.0;
    ForcingFn forcing;
    RhsConvention rhs = RhsConvention::HF;  // used by ellipses only

    void validate() const;
    bool is_time() const { return variant == Variant::TimeDependent; }
    int input_dim() const { return is_time() ? 3 : 2; }
};

/// Ansatz matching a problem (time mask for time problems).
AnsatzSpec make_ansatz_spec(const ProblemSpec& problem, AnsatzKind kind);

/// Right-hand side at a computational point: f, or H f for ellipses with the HF convention.
double rhs_value(const ProblemSpec& problem, const Point& p);

/// Operator applied to a jet in computational coordinates. The cubic term of
/// the nonlinear variant is added only when include_cubic is set.
template <class S>
S apply_operator_jet(const ProblemSpec& pb, const Jet<S>& v, const Point& p, bool include_cubic) {
    const double eps = pb.epsilon;
    const DomainSpec& d = pb.domain;
    S r;
    if (d.kind == DomainKind::Channel) {
        r = (v.hess(0, 0) + v.hess(1, 1)) * (-eps) - v.g[1];
    } else if (d.kind == DomainKind::Circle) {
        const double rho = 1.0 - p[0];
        const double s = std::sin(p[1]);
        const double c = std::cos(p[1]);
        const S lap = v.hess(1, 1) - v.g[0] * rho + v.hess(0, 0) * (rho * rho);
        r = (lap * (-eps) + v.g[0] * (rho * rho * s) - v.g[1] * (rho * c)) * (1.0 / (rho * rho));
    } else {
        const double xi = d.R - p[0];
        const double s = std::sin(p[1]);
        const double c = std::cos(p[1]);
        const bool xmaj = d.kind == DomainKind::EllipseXMajor;
        const double alpha = d.a * (xmaj ? std::cosh(xi) : std::sinh(xi)) * s;
        const double beta = d.a * (xmaj ? std::sinh(xi) : std::cosh(xi)) * c;
        r = (v.hess(0, 0) + v.hess(1, 1)) * (-eps) + v.g[0] * alpha - v.g[1] * beta;
    }
    if (pb.variant == Variant::TimeDependent) r = r + v.g[2];
    if (include_cubic && pb.variant == Variant::NonlinearCubic) r = r + v.v * v.v * v.v;
    return r;
}

/// Residual (operator applied to the ansatz) minus the right-hand side.
double apply_operator(const ProblemSpec& problem, const NetworkParams& params, const AnsatzSpec& spec,
                      const Point& p);

enum class ExpansionReading { Corrected, Verbatim };

struct ExpansionTerm {
    std::string name;
    double value;
};

struct ExpandedResidual {
    std::vector<ExpansionTerm> terms;
    double total = 0.0;
    double term(const std::string& name) const;
};

/// Hand-expanded residual for the singular-layer ansatz.
ExpandedResidual expanded_residual(const ProblemSpec& problem, const NetworkParams& params, const Point& p,
                                   ExpansionReading reading = ExpansionReading::Corrected);

/// Coefficient k such that psi = k * vhat(0, tau[, t]). Zero on the upper half.
double psi_coefficient(const ProblemSpec& problem, const Point& p);

/// Dominant O(1/eps) part of the lower-half residual.
double psi_dominant(const ProblemSpec& problem, const NetworkParams& params, const Point& p);

/// The residual at a point as a function of the network bundles at the point
/// and at its trace point:
///   r = point . B + trace . B_tr [+ (value_point . B + value_trace . B_tr)^3] - rhs
/// psi = psi * B_tr[0].
struct ResidualStencil {
    BundleVector point{};
    BundleVector trace{};
    BundleVector value_point{};
    BundleVector value_trace{};
    double rhs = 0.0;
    double psi = 0.0;
    bool uses_trace = false;
    bool cubic = false;
};

ResidualStencil build_stencil(const ProblemSpec& problem, const AnsatzSpec& spec, const Point& p);

}  // namespace slpinn
