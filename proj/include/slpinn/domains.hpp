#pragma once

// Domain families, boundary-fitted coordinates and collocation grids.
//
// Computational points are stored as Point = (c0, c1, c2):
//   Channel          (x, y, -)
//   Circle/Ellipse   (eta, tau, t)   with t used only by time problems.
// The network always sees Cartesian inputs (x, y[, t]); CoordinateMap carries
// the map from computational to Cartesian coordinates with its first and
// second derivatives so derivative bundles can be pulled back exactly.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "slpinn/autodiff.hpp"
#include "slpinn/net.hpp"

namespace slpinn {

enum class DomainKind { Channel, Circle, EllipseXMajor, EllipseYMajor };

struct DomainSpec {
    DomainKind kind = DomainKind::Channel;
    double A = 1.0;  // semi-axis along x
    double B = 1.0;  // semi-axis along y
    double a = 0.0;  // focal scale (ellipse)
    double R = 1.0;  // outer limit of the layer coordinate eta

    static DomainSpec channel();
    static DomainSpec circle();
    /// Orientation follows from A > B (x-major) or B > A (y-major).
    static DomainSpec ellipse(double A, double B);

    bool is_polar() const { return kind != DomainKind::Channel; }
    bool is_ellipse() const { return kind == DomainKind::EllipseXMajor || kind == DomainKind::EllipseYMajor; }
    /// Multiplier k of the corrector exponent k*sin(tau)*eta/eps (x-semi-axis).
    double corrector_rate() const;
    /// Index of the layer-normal computational axis (eta, or y for the channel).
    int normal_axis() const { return is_polar() ? 0 : 1; }
    std::string name() const;
};

struct EllipticParameters {
    double a;
    double R;
};

EllipticParameters elliptic_parameters(double A, double B, DomainKind orientation);

/// tau in [0, 2pi] on the layer side: pi <= tau <= 2pi, with tau = 0 identified with 2pi.
bool in_lower_half(double tau);

std::array<double, 2> to_cartesian(const DomainSpec& domain, const Point& p);

/// Metric factor: H for ellipses, (1 - eta)^2 for the circle.
double metric_H(const DomainSpec& domain, const Point& p);

/// Cartesian inputs (x, y, t) as jets in the computational variables.
struct CoordinateMap {
    std::array<Jet<double>, 3> input;
};

CoordinateMap coordinate_map(const DomainSpec& domain, const Point& p);

/// Pull a Cartesian derivative bundle (flat slots, see net.hpp) back to a jet
/// in computational variables via the exact chain rule.
template <class S>
Jet<S> pullback(const std::array<S, kBundleSize>& e, const CoordinateMap& map) {
    Jet<S> out;
    out.v = e[0];
    for (std::size_t a = 0; a < 3; ++a) {
        S acc = S(0.0);
        for (std::size_t i = 0; i < 3; ++i) {
            const double J = map.input[i].g[a];
            if (J != 0.0) acc = acc + e[1 + i] * J;
        }
        out.g[a] = acc;
    }
    for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t b = a; b < 3; ++b) {
            S acc = S(0.0);
            for (std::size_t i = 0; i < 3; ++i) {
                const double Ji = map.input[i].g[a];
                const double M = map.input[i].hess(a, b);
                if (M != 0.0) acc = acc + e[1 + i] * M;
                if (Ji == 0.0) continue;
                for (std::size_t k = 0; k < 3; ++k) {
                    const double Jk = map.input[k].g[b];
                    if (Jk != 0.0) acc = acc + e[4 + packed_index(i, k)] * (Ji * Jk);
                }
            }
            out.hess(a, b) = acc;
        }
    }
    return out;
}

struct SampleGrid {
    DomainSpec domain;
    bool time = false;
    int n_eta = 0;  // layer-normal axis (y for the channel)
    int n_tau = 0;  // tangential axis (x for the channel)
    int n_t = 0;
    double T = 1.0;
    std::vector<Point> points;
    std::vector<std::array<double, 2>> cartesian;

    std::size_t size() const { return points.size(); }
    /// Columns: computational coordinates, then x, y.
    void write_csv(std::ostream& os) const;
    std::vector<std::string> coordinate_names() const;
};

/// Tensor-product grid. Channel: nodes (i + 1/2)/n on both axes. Circle and
/// ellipse: eta_i = (i + 1/2) R / n_eta, tau_j = 2 pi (j + 1/2) / n_tau.
/// Time problems (n_t >= 2): t_k = k T / (n_t - 1).
SampleGrid uniform_grid(const DomainSpec& domain, int n_eta, int n_tau, int n_t = 0, double T = 1.0);

/// Grid made of explicitly listed points (validated like a uniform grid).
SampleGrid custom_grid(const DomainSpec& domain, std::vector<Point> points, bool time);

struct RegionSplit {
    std::vector<std::size_t> upper;
    std::vector<std::size_t> lower;
};

RegionSplit split_layer_region(const SampleGrid& grid);

}  // namespace slpinn
