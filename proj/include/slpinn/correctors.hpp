#pragma once

// Boundary-layer correctors, cut-off, regularizing factor and the full
// corrector-enriched ansatz.
//
// Every ansatz used here has the form
//     v~ = P * net + Q * trace
// where net is the network pulled back to computational coordinates, trace
// is the network on the boundary curve (eta = 0, or y = 0 for the channel)
// with its normal derivatives removed, and P, Q are fixed geometric jets:
//   circle/ellipse  P = m C,  Q = -m C phi      (m = e^t - 1 or 1)
//   channel         P = x(x-1)(y-1),  Q = x(x-1) e^{-y/eps}
//   baseline        P = m (1 - rho^3) or x(x-1)y(1-y),  Q = 0

#include "slpinn/autodiff.hpp"
#include "slpinn/domains.hpp"
#include "slpinn/net.hpp"

namespace slpinn {

struct CutoffFn {
    double R = 1.0;
    double plateau_end() const { return 0.5 * R; }
    double support_end() const { return 0.75 * R; }
};

struct CutoffValue {
    double delta;
    double d1;
    double d2;
};

/// Quintic smoothstep transition on [R/2, 3R/4].
CutoffValue cutoff_eval(const CutoffFn& c, double eta);

/// Exponents below this value are treated as exact underflow.
inline constexpr double kUnderflowExponent = -700.0;

/// Corrector profile phi in computational variables: exp(k sin(tau) eta/eps)
/// delta(eta) chi_lower(tau) for circle/ellipse, exp(-y/eps) for the channel.
Jet<double> corrector_factor(const DomainSpec& domain, double eps, const Point& p);

/// Regularizing boundary factor C(eta, tau) with all partials.
Jet<double> regularizer_C(const DomainSpec& domain, const Point& p);

/// Radial factor 1 - rho^3 of C on both halves: the hard-constraint mask of
/// the baseline network, which has no corrector to cancel C on the layer side.
Jet<double> baseline_mask(const DomainSpec& domain, const Point& p);

enum class AnsatzKind { SingularLayer, Baseline };

struct AnsatzSpec {
    DomainSpec domain;
    AnsatzKind kind = AnsatzKind::SingularLayer;
    double epsilon = 1e-6;
    bool time_mask = false;  // multiply by e^t - 1
};

struct AnsatzGeometry {
    Jet<double> P;
    Jet<double> Q;
    bool uses_trace = false;
};

AnsatzGeometry ansatz_geometry(const AnsatzSpec& spec, const Point& p);

/// Computational point whose network bundle forms the trace.
Point trace_point(const AnsatzSpec& spec, const Point& p);

/// Drop every derivative involving the layer-normal axis.
template <class S>
Jet<S> strip_normal(Jet<S> j, int axis) {
    j.g[axis] = S(0.0);
    for (int k = 0; k < 3; ++k) j.hess(axis, k) = S(0.0);
    return j;
}

template <class S>
Jet<S> lift(const Jet<double>& j) {
    Jet<S> o;
    o.v = S(j.v);
    for (int i = 0; i < 3; ++i) o.g[i] = S(j.g[i]);
    for (int i = 0; i < 6; ++i) o.h[i] = S(j.h[i]);
    return o;
}

/// v~ from network entries at the point and at its trace point.
template <class S>
Jet<S> combine_ansatz(const AnsatzSpec& spec, const AnsatzGeometry& geo, const CoordinateMap& map,
                      const CoordinateMap& trace_map, const std::array<S, kBundleSize>& at_point,
                      const std::array<S, kBundleSize>& at_trace) {
    Jet<S> v = lift<S>(geo.P) * pullback(at_point, map);
    if (geo.uses_trace) {
        const Jet<S> tr = strip_normal(pullback(at_trace, trace_map), spec.domain.normal_axis());
        v = v + lift<S>(geo.Q) * tr;
    }
    return v;
}

/// The ansatz and its computational-coordinate partials at one point.
Jet<double> assemble_ansatz(const AnsatzSpec& spec, const NetworkParams& params, const Point& p);

/// Network input (x, y[, t]) for a computational point.
Point network_input(const DomainSpec& domain, const Point& p, int input_dim);

}  // namespace slpinn
