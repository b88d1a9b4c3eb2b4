#include "slpinn/problems.hpp"

#include <cmath>
#include <numbers>

#include "slpinn/error.hpp"
#include "slpinn/reference.hpp"

namespace slpinn {

namespace {

ProblemSpec base(const DomainSpec& d, double eps, ForcingFn f) {
    ProblemSpec p;
    p.domain = d;
    p.epsilon = eps;
    p.forcing = std::move(f);
    return p;
}

ReferenceFn asymptotic(const ProblemSpec& pb) {
    return [pb](const Point& p) { return asymptotic_reference(pb, p); };
}

}  // namespace

std::vector<std::string> table1_problem_ids() {
    return {"square", "circle_noncompatible", "circle_compatible", "ellipse_4_1", "ellipse_1_4", "oscillation",
            "nonlinear"};
}

std::vector<std::string> problem_ids() {
    auto ids = table1_problem_ids();
    ids.push_back("time_circle");
    return ids;
}

ProblemCase make_problem(const std::string& id, double eps, const ProblemOptions& opt) {
    if (!(eps > 0.0)) throw ConfigError("epsilon must be positive");
    ProblemCase c;
    c.id = id;
    if (id == "square") {
        c.label = "square";
        c.problem = base(DomainSpec::channel(), eps,
                         [](double x, double, double) { return std::sin(2.0 * std::numbers::pi * x); });
        c.reference = [eps](const Point& p) { return channel_exact(eps, p[0], p[1]); };
        c.reference_name = "channel_exact";
    } else if (id == "circle_noncompatible") {
        c.label = "circle non-compatible";
        c.problem = base(DomainSpec::circle(), eps, [](double, double, double) { return 1.0; });
        c.reference = asymptotic(c.problem);
        c.reference_name = "asymptotic_reference";
    } else if (id == "circle_compatible") {
        c.label = "circle compatible";
        c.problem = base(DomainSpec::circle(), eps, [](double x, double, double) {
            const double w = 1.0 - x * x;
            return w * w;
        });
        c.reference = asymptotic(c.problem);
        c.reference_name = "asymptotic_reference";
    } else if (id == "ellipse_4_1" || id == "ellipse_1_4") {
        const bool wide = id == "ellipse_4_1";
        const double A = wide ? 4.0 : 1.0;
        const double B = wide ? 1.0 : 4.0;
        c.label = wide ? "ellipse 4:1" : "ellipse 1:4";
        c.problem = base(DomainSpec::ellipse(A, B), eps, [A, B](double x, double, double) {
            const double w = 1.0 - (x / A) * (x / A);
            return w * w / B;
        });
        c.problem.rhs = opt.rhs;
        c.reference = asymptotic(c.problem);
        c.reference_name = "asymptotic_reference";
    } else if (id == "oscillation") {
        c.label = "oscillation";
        const Expression amp = Expression::parse(opt.amplitude);
        c.problem = base(DomainSpec::circle(), eps, oscillation_forcing(eps, amp));
        c.reference = [eps, amp](const Point& p) {
            const auto xy = to_cartesian(DomainSpec::circle(), p);
            return oscillation_exact(eps, amp, xy[0], xy[1]);
        };
        c.reference_name = "oscillation_exact";
    } else if (id == "nonlinear") {
        c.label = "non-linear";
        // f = 1 + (u0)^3 with u0 = sqrt(1-x^2) - y, so the limit solution is u0.
        c.problem = base(DomainSpec::circle(), eps, [](double x, double y, double) {
            const double u0 = std::sqrt(std::max(0.0, 1.0 - x * x)) - y;
            return 1.0 + u0 * u0 * u0;
        });
        c.problem.variant = Variant::NonlinearCubic;
        const ProblemSpec linear = base(DomainSpec::circle(), eps, [](double, double, double) { return 1.0; });
        c.reference = asymptotic(linear);
        c.reference_name = "asymptotic_reference";
    } else if (id == "time_circle") {
        c.label = "time circle";
        c.problem = base(DomainSpec::circle(), eps, time_circle_forcing(eps));
        c.problem.variant = Variant::TimeDependent;
        c.problem.T = opt.T;
        c.reference = [eps](const Point& p) {
            const auto xy = to_cartesian(DomainSpec::circle(), p);
            return time_circle_exact(eps, p[2], xy[0], xy[1]);
        };
        c.reference_name = "time_circle_exact";
    } else {
        throw ConfigError("unknown problem '" + id + "'");
    }
    return c;
}

ProblemCase custom_problem(const ProblemSpec& problem, const std::string& id) {
    problem.validate();
    ProblemCase c;
    c.id = id;
    c.label = id;
    c.problem = problem;
    if (problem.variant == Variant::LinearSteady) {
        c.reference = asymptotic(problem);
        c.reference_name = "asymptotic_reference";
    }
    return c;
}

}  // namespace slpinn
