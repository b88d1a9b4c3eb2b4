#pragma once

#include <cmath>
#include <functional>
#include <numbers>

#include "slpinn/domains.hpp"
#include "slpinn/net.hpp"

namespace slpinn::test {

inline constexpr double pi = std::numbers::pi;

/// Two-layer network with parameters drawn from the library initializer but
/// scaled up so second derivatives are not negligible.
inline NetworkParams random_two_layer(std::uint64_t seed, int input_dim = 2, int width = 20, double scale = 3.0) {
    NetworkParams p = init_params(seed, Architecture::TwoLayer, input_dim, {width});
    p.assign(p.flatten() * scale);
    return p;
}

/// Fourth-order central difference of a scalar function.
inline double fd1(const std::function<double(double)>& f, double x, double h) {
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

inline double fd2(const std::function<double(double)>& f, double x, double h) {
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h);
}

inline double rel_diff(double a, double b, double floor = 1e-8) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Computational point (eta, tau) of a Cartesian point inside the unit disk.
inline Point circle_point(double x, double y, double t = 0.0) {
    double tau = std::atan2(y, x);
    if (tau <= 0.0) tau += 2 * pi;
    return Point{1.0 - std::hypot(x, y), tau, t};
}

}  // namespace slpinn::test
