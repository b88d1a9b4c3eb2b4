#pragma once

// Named experiments (the error-table columns plus the time-dependent circle) and
// their designated reference fields.

#include <functional>
#include <string>
#include <vector>

#include "slpinn/domains.hpp"
#include "slpinn/expr.hpp"
#include "slpinn/residuals.hpp"

namespace slpinn {

using ReferenceFn = std::function<double(const Point&)>;

struct ProblemOptions {
    std::string amplitude = "sqrt(1-x^2)";  // oscillation A(x)
    RhsConvention rhs = RhsConvention::HF;
    double T = 1.0;
};

struct ProblemCase {
    std::string id;
    std::string label;
    ProblemSpec problem;
    ReferenceFn reference;       // empty when no reference is available
    std::string reference_name;  // channel_exact, asymptotic_reference, ...
};

/// ids: square, circle_noncompatible, circle_compatible, ellipse_4_1,
/// ellipse_1_4, oscillation, nonlinear, time_circle.
ProblemCase make_problem(const std::string& id, double eps, const ProblemOptions& options = {});

std::vector<std::string> problem_ids();

/// The seven error-table problems in order.
std::vector<std::string> table1_problem_ids();

/// Reference designated for an arbitrary problem (asymptotic reference for
/// steady linear problems, none otherwise).
ProblemCase custom_problem(const ProblemSpec& problem, const std::string& id);

}  // namespace slpinn
