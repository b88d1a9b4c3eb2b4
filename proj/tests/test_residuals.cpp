#include <doctest.h>

#include <cmath>
#include <random>

#include "slpinn/correctors.hpp"
#include "slpinn/error.hpp"
#include "slpinn/problems.hpp"
#include "slpinn/residuals.hpp"
#include "test_util.hpp"

using namespace slpinn;
using slpinn::test::pi;

namespace {

ProblemSpec circle_problem(double eps, ForcingFn f, Variant v = Variant::LinearSteady) {
    ProblemSpec pb;
    pb.domain = DomainSpec::circle();
    pb.variant = v;
    pb.epsilon = eps;
    pb.forcing = std::move(f);
    return pb;
}

/// -eps Lap v - v_y - f evaluated by Cartesian finite differences of the ansatz value.
double cartesian_fd_residual(const ProblemSpec& pb, const AnsatzSpec& spec, const NetworkParams& params, double x,
                             double y) {
    auto v = [&](double xx, double yy) {
        const Point q = pb.domain.is_polar() ? test::circle_point(xx, yy) : Point{xx, yy, 0.0};
        return assemble_ansatz(spec, params, q).v;
    };
    const double h = 1e-3;
    const double vxx = test::fd2([&](double s) { return v(s, y); }, x, h);
    const double vyy = test::fd2([&](double s) { return v(x, s); }, y, h);
    const double vy = test::fd1([&](double s) { return v(x, s); }, y, h);
    return -pb.epsilon * (vxx + vyy) - vy - pb.forcing(x, y, 0.0);
}

}  // namespace

TEST_CASE("zero parameters leave minus the right-hand side") {
    const NetworkParams zero = NetworkParams::zeros(Architecture::TwoLayer, 2, {20});
    for (const std::string id : {"square", "circle_compatible", "ellipse_4_1", "ellipse_1_4", "circle_noncompatible"}) {
        const ProblemCase pc = make_problem(id, 1e-6);
        const AnsatzSpec spec = make_ansatz_spec(pc.problem, AnsatzKind::SingularLayer);
        const Point p = pc.problem.domain.is_polar() ? Point{0.3 * pc.problem.domain.R, 4.0, 0} : Point{0.3, 0.6, 0};
        CHECK(apply_operator(pc.problem, zero, spec, p) == doctest::Approx(-rhs_value(pc.problem, p)));
        CHECK(expanded_residual(pc.problem, zero, p).total == doctest::Approx(-rhs_value(pc.problem, p)));
    }
    const ProblemSpec cubic = circle_problem(1e-6, [](double, double, double) { return 1.0; }, Variant::NonlinearCubic);
    const AnsatzSpec spec = make_ansatz_spec(cubic, AnsatzKind::SingularLayer);
    CHECK(apply_operator(cubic, zero, spec, Point{0.4, 2.0, 0}) == doctest::Approx(-1.0));
}

TEST_CASE("direct residual agrees with a Cartesian finite-difference oracle") {
    const NetworkParams params = test::random_two_layer(41);
    const double eps = 0.1;
    SUBCASE("channel") {
        ProblemSpec pb;
        pb.domain = DomainSpec::channel();
        pb.epsilon = eps;
        pb.forcing = [](double x, double, double) { return std::sin(2 * pi * x); };
        const AnsatzSpec spec = make_ansatz_spec(pb, AnsatzKind::SingularLayer);
        for (auto [x, y] : {std::pair{0.3, 0.4}, std::pair{0.7, 0.15}, std::pair{0.5, 0.9}}) {
            const double direct = apply_operator(pb, params, spec, Point{x, y, 0});
            CHECK(direct == doctest::Approx(cartesian_fd_residual(pb, spec, params, x, y)).epsilon(1e-5));
        }
    }
    SUBCASE("circle, both halves") {
        const ProblemSpec pb = circle_problem(eps, [](double x, double, double) { return 1.0 + x * x; });
        const AnsatzSpec spec = make_ansatz_spec(pb, AnsatzKind::SingularLayer);
        for (auto [x, y] : {std::pair{0.2, 0.5}, std::pair{-0.3, -0.6}, std::pair{0.5, -0.1}}) {
            const double direct = apply_operator(pb, params, spec, test::circle_point(x, y));
            CHECK(direct == doctest::Approx(cartesian_fd_residual(pb, spec, params, x, y)).epsilon(1e-5));
        }
    }
}

TEST_CASE("corrected expansion equals the direct residual") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const NetworkParams params = test::random_two_layer(43);
    const NetworkParams params3 = test::random_two_layer(44, 3);
    for (const std::string id : {"square", "circle_compatible", "ellipse_4_1", "ellipse_1_4", "time_circle"}) {
        for (double eps : {1e-2, 1e-4}) {
            const ProblemCase pc = make_problem(id, eps);
            const DomainSpec& d = pc.problem.domain;
            const NetworkParams& p = pc.problem.is_time() ? params3 : params;
            const AnsatzSpec spec = make_ansatz_spec(pc.problem, AnsatzKind::SingularLayer);
            double worst = 0.0;
            for (int i = 0; i < 100; ++i) {
                const Point q = d.is_polar() ? Point{(0.02 + 0.9 * u(rng)) * d.R, 2 * pi * u(rng), u(rng)}
                                             : Point{0.02 + 0.96 * u(rng), 0.02 + 0.96 * u(rng), 0.0};
                const double direct = apply_operator(pc.problem, p, spec, q);
                const double expanded = expanded_residual(pc.problem, p, q).total;
                worst = std::max(worst, std::abs(expanded - direct) / (1.0 + std::abs(direct)));
            }
            CAPTURE(id);
            CAPTURE(eps);
            CHECK(worst <= 1e-10);
        }
    }
}

TEST_CASE("dominant term") {
    const ProblemSpec pb = circle_problem(1e-3, [](double, double, double) { return 1.0; });
    const NetworkParams params = test::random_two_layer(45);
    CHECK(psi_dominant(pb, params, Point{0.001, 1.5 * pi, 0}) == doctest::Approx(0.0).scale(1e-12));
    CHECK(psi_dominant(pb, params, Point{0.001, pi / 2, 0}) == 0.0);
    CHECK(psi_dominant(pb, params, Point{0.8, 3.5, 0}) == 0.0);
    CHECK(psi_dominant(pb, params, Point{0.001, 3.5, 0}) != 0.0);
    CHECK(psi_dominant(pb, NetworkParams::zeros(Architecture::TwoLayer, 2, {20}), Point{0.001, 3.5, 0}) == 0.0);
    CHECK_THROWS_AS(psi_coefficient(make_problem("square", 1e-3).problem, Point{0.5, 0.5, 0}), NotApplicable);
}

TEST_CASE("stencil reproduces the direct residual") {
    const NetworkParams params = test::random_two_layer(46);
    for (const std::string id : {"square", "circle_noncompatible", "ellipse_4_1", "nonlinear"}) {
        const ProblemCase pc = make_problem(id, 1e-2);
        const AnsatzSpec spec = make_ansatz_spec(pc.problem, AnsatzKind::SingularLayer);
        const Point q = pc.problem.domain.is_polar() ? Point{0.1 * pc.problem.domain.R, 4.4, 0} : Point{0.3, 0.2, 0};
        const ResidualStencil st = build_stencil(pc.problem, spec, q);
        const auto in = network_input(pc.problem.domain, q, 2);
        const auto tin = network_input(pc.problem.domain, trace_point(spec, q), 2);
        const BundleVector b = eval_network(params, std::span<const double>(in.data(), 2)).flat();
        const BundleVector bt = eval_network(params, std::span<const double>(tin.data(), 2)).flat();
        double r = -st.rhs, val = 0.0;
        for (int e = 0; e < kBundleSize; ++e) {
            r += st.point[e] * b[e] + (st.uses_trace ? st.trace[e] * bt[e] : 0.0);
            val += st.value_point[e] * b[e] + (st.uses_trace ? st.value_trace[e] * bt[e] : 0.0);
        }
        if (st.cubic) r += val * val * val;
        CAPTURE(id);
        CHECK(r == doctest::Approx(apply_operator(pc.problem, params, spec, q)).epsilon(1e-11));
    }
}

TEST_CASE("points outside the interior are rejected") {
    const ProblemCase pc = make_problem("circle_compatible", 1e-3);
    const AnsatzSpec spec = make_ansatz_spec(pc.problem, AnsatzKind::SingularLayer);
    const NetworkParams params = test::random_two_layer(1);
    CHECK_THROWS(apply_operator(pc.problem, params, spec, Point{1.0, 1.0, 0}));
    CHECK_THROWS(apply_operator(pc.problem, params, spec, Point{-0.1, 1.0, 0}));
}
