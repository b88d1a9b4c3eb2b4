#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "slpinn/analysis.hpp"
#include "slpinn/error.hpp"
#include "test_util.hpp"

using namespace slpinn;
using slpinn::test::pi;

namespace {

/// Closed-form inner integral: int_0^R (1/eps) exp(-k s eta/eps) d eta = (1 - exp(-k s R/eps)) / (k s),
/// integrated over tau in (pi, 2pi) with s = |sin tau|, by composite Simpson on
/// geometric panels toward the endpoints (where s -> 0).
double exponential_mass_oracle(double k, double R, double eps) {
    auto g = [&](double u) {  // u in (0, pi/2), s = sin u; both quarter arcs contribute equally
        const double s = std::sin(u);
        const double c = k * s * R / eps;
        return c < 1e-8 ? R / eps : -std::expm1(-c) / (k * s);
    };
    double total = 0.0;
    double hi = pi / 2;
    for (int panel = 0; panel < 80; ++panel) {
        const double lo = panel == 79 ? 0.0 : hi / 2;
        const int n = 200;
        const double h = (hi - lo) / n;
        double acc = g(lo) + g(hi);
        for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * g(lo + i * h);
        total += acc * h / 3.0;
        hi = lo;
    }
    return 2.0 * total;
}

}  // namespace

TEST_CASE("relative L2 error") {
    const std::vector<double> ref{1.0, -2.0, 0.5, 3.0};
    CHECK(relative_l2_error(ref, ref) == 0.0);
    CHECK(relative_l2_error(std::vector<double>(4, 0.0), ref) == doctest::Approx(1.0));
    std::vector<double> scaled;
    for (double r : ref) scaled.push_back(1.01 * r);
    CHECK(relative_l2_error(scaled, ref) == doctest::Approx(0.01).epsilon(1e-12));
    const std::vector<double> w{1.0, 0.0, 0.0, 0.0};
    CHECK(relative_l2_error(std::vector<double>{2.0, 0.0, 0.0, 0.0}, ref, w) == doctest::Approx(1.0));
    CHECK_THROWS_AS(relative_l2_error(ref, std::vector<double>(4, 0.0)), DomainError);
    CHECK_THROWS_AS(relative_l2_error(std::vector<double>{1.0}, ref), DimensionError);
}

TEST_CASE("corrector norm scalings") {
    const DomainSpec circle = DomainSpec::circle();
    const TraceAmplitude a =
        limit_trace_amplitude(circle, [](double x, double, double) { return std::pow(1 - x * x, 2); });
    const std::vector<double> eps{1e-2, 1e-3, 1e-4, 1e-5};
    const LemmaScaling tau = lemma_norm_scaling(circle, eps, 0, 0, 0, 1, 2.0, a);
    REQUIRE(tau.fitted);
    CHECK(std::abs(tau.slope - 0.5) <= 0.1);
    const LemmaScaling eta = lemma_norm_scaling(circle, eps, 0, 0, 1, 0, 2.0, a);
    CHECK(std::abs(eta.slope + 0.5) <= 0.1);
    const LemmaScaling value = lemma_norm_scaling(circle, eps, 0, 0, 0, 0, 2.0, a);
    CHECK(std::abs(value.slope - 0.5) <= 0.1);

    const LemmaScaling finer = lemma_norm_scaling(circle, eps, 0, 0, 0, 1, 2.0, a, 2);
    CHECK(std::abs(finer.slope - tau.slope) <= 0.02);

    const TraceAmplitude zero = [](double) { return std::array<double, 3>{0.0, 0.0, 0.0}; };
    const LemmaScaling none = lemma_norm_scaling(circle, eps, 0, 0, 0, 1, 2.0, zero);
    CHECK_FALSE(none.fitted);
    for (double v : none.norms) CHECK(v == 0.0);

    CHECK_THROWS_AS(lemma_norm_scaling(circle, {1e-2, 1e-3}, 0, 0, 0, 1, 2.0, a), DomainError);
    CHECK_THROWS_AS(lemma_norm_scaling(circle, {1e-2, 5e-3, 1e-3}, 0, 0, 0, 1, 2.0, a), DomainError);
    CHECK_THROWS_AS(lemma_norm_scaling(circle, eps, 0, 0, 2, 1, 2.0, a), DomainError);
}

TEST_CASE("scaled exponential mass") {
    const DomainSpec circle = DomainSpec::circle();
    const std::vector<double> eps{1e-3, 1e-5, 1e-8};
    const ExponentialMass m = scaled_exponential_l1_mass(circle, eps);
    for (std::size_t i = 0; i < eps.size(); ++i) {
        CHECK(m.values[i] == doctest::Approx(exponential_mass_oracle(1.0, circle.R, eps[i])).epsilon(1e-6));
    }
    // Logarithmic growth: each decade of epsilon adds (2/k) ln 10 to the mass.
    const ExponentialMass step = scaled_exponential_l1_mass(circle, {1e-7, 1e-8});
    CHECK(step.values[1] - step.values[0] == doctest::Approx(2.0 * std::log(10.0)).epsilon(1e-4));

    const ExponentialMass doubled = scaled_exponential_l1_mass(circle, eps, 2.0);
    for (std::size_t i = 0; i < eps.size(); ++i) {
        CHECK(doubled.values[i] == doctest::Approx(exponential_mass_oracle(2.0, circle.R, eps[i])).epsilon(1e-6));
        CHECK(doubled.values[i] / m.values[i] == doctest::Approx(0.5).epsilon(0.1));
    }
    const ExponentialMass upper = scaled_exponential_l1_mass(circle, eps, 1.0, true);
    for (double v : upper.values) CHECK(v == 0.0);

    const DomainSpec e = DomainSpec::ellipse(4.0, 1.0);
    const ExponentialMass em = scaled_exponential_l1_mass(e, {1e-4});
    CHECK(em.values[0] == doctest::Approx(exponential_mass_oracle(e.corrector_rate(), e.R, 1e-4)).epsilon(1e-6));
    CHECK_THROWS_AS(scaled_exponential_l1_mass(DomainSpec::channel(), eps), NotApplicable);
}

TEST_CASE("error report") {
    ErrorReport r;
    r.rows.push_back({"ellipse_4_1", 1e-6, Method::SLPinnL2, 0.01, 2.0, 0, "ok"});
    r.rows.push_back({"square", 1e-8, Method::PinnL2, 0.9, 1.0, 0, "ok"});
    r.rows.push_back({"square", 1e-4, Method::SLPinnL1, std::numeric_limits<double>::quiet_NaN(), 0.0, 3,
                      "failed: x"});
    r.sort();
    CHECK(r.rows[0].problem == "square");
    CHECK(r.rows[0].epsilon == 1e-4);
    CHECK(r.rows[2].problem == "ellipse_4_1");
    std::ostringstream os;
    r.write_csv(os);
    std::istringstream in(os.str());
    std::string header, first;
    std::getline(in, header);
    std::getline(in, first);
    CHECK(header == "problem,epsilon,method,rel_l2,runtime_s,seed");
    CHECK(first.rfind("square,0.0001,SL-PINN-L1,nan,", 0) == 0);
    const std::string table = r.render_table();
    CHECK(table.find("SL-PINN") != std::string::npos);
    CHECK(table.find("PINN") != std::string::npos);
    CHECK(r.find("square", 1e-8, Method::PinnL2)->rel_l2 == 0.9);
    CHECK(r.find("square", 1e-6, Method::PinnL2) == nullptr);
    CHECK(parse_method(method_name(Method::SLPinnL1)) == Method::SLPinnL1);
    CHECK_THROWS_AS(parse_method("PINN-L1"), ConfigError);
}

TEST_CASE("sweep over the full matrix records every row") {
    SweepConfig cfg;
    cfg.train.iterations = 0;
    cfg.train.n_eta = cfg.train.n_tau = 4;
    cfg.time_train.iterations = 0;
    cfg.time_train.n_eta = cfg.time_train.n_tau = 4;
    cfg.width = 3;
    cfg.baseline_widths = {3, 3, 3, 3, 3};
    const ErrorReport r = epsilon_sweep(table1_problem_ids(), {1e-4, 1e-6, 1e-8},
                                        {Method::PinnL2, Method::SLPinnL2, Method::SLPinnL1}, cfg);
    CHECK(r.rows.size() == 63);
    for (const auto& row : r.rows) {
        CAPTURE(row.problem);
        CHECK(row.status == "ok");
        CHECK(row.rel_l2 >= 0.0);
    }
    const ErrorRow bad = run_case("hexagon", 1e-6, Method::SLPinnL2, cfg);
    CHECK(std::isnan(bad.rel_l2));
    CHECK(bad.status.rfind("failed:", 0) == 0);
}

TEST_CASE("method configuration") {
    const SweepConfig cfg;
    const ProblemSpec circle = make_problem("circle_compatible", 1e-6).problem;
    const ProblemSpec channel = make_problem("square", 1e-6).problem;
    CHECK(method_config(cfg, circle, Method::SLPinnL1).p == 1);
    CHECK(method_config(cfg, circle, Method::SLPinnL1).psi_split);
    CHECK_FALSE(method_config(cfg, channel, Method::SLPinnL1).psi_split);
    CHECK(method_config(cfg, circle, Method::SLPinnL2).p == 2);
    CHECK_FALSE(method_config(cfg, circle, Method::SLPinnL2).psi_split);
    CHECK(method_config(cfg, make_problem("time_circle", 1e-6).problem, Method::SLPinnL2).n_t >= 2);
}
