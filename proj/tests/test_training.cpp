#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "slpinn/error.hpp"
#include "slpinn/problems.hpp"
#include "slpinn/training.hpp"
#include "test_util.hpp"

using namespace slpinn;
using slpinn::test::pi;

namespace {

ProblemSpec constant_forcing(const DomainSpec& d, Variant v = Variant::LinearSteady) {
    ProblemSpec pb;
    pb.domain = d;
    pb.variant = v;
    pb.epsilon = 1e-3;
    pb.forcing = [](double, double, double) { return 1.0; };
    return pb;
}

TrainConfig small_config(int p = 2) {
    TrainConfig c;
    c.p = p;
    c.n_eta = 8;
    c.n_tau = 10;
    c.iterations = 0;
    return c;
}

Eigen::VectorXd fd_gradient(const ProblemSpec& pb, const AnsatzSpec& spec, const NetworkParams& params,
                            const SampleGrid& grid, const TrainConfig& cfg, double h) {
    const LossEvaluator ev(pb, spec, grid, cfg);
    const Eigen::VectorXd theta = params.flatten();
    Eigen::VectorXd g(theta.size());
    NetworkParams q = params;
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
        auto f = [&](double s) {
            Eigen::VectorXd th = theta;
            th[k] = s;
            q.assign(th);
            return ev.loss(q);
        };
        g[k] = test::fd1(f, theta[k], h);
    }
    return g;
}

}  // namespace

TEST_CASE("loss of the zero network with unit forcing") {
    for (int p : {1, 2}) {
        const ProblemSpec pb = constant_forcing(DomainSpec::channel());
        const AnsatzSpec spec = make_ansatz_spec(pb, AnsatzKind::SingularLayer);
        const NetworkParams zero = NetworkParams::zeros(Architecture::TwoLayer, 2, {20});
        TrainConfig cfg = small_config(p);
        CHECK(loss(pb, spec, zero, training_grid(pb, cfg), cfg) == doctest::Approx(1.0).epsilon(1e-15));
    }
    const ProblemSpec circle = constant_forcing(DomainSpec::circle());
    const AnsatzSpec spec = make_ansatz_spec(circle, AnsatzKind::SingularLayer);
    const NetworkParams zero = NetworkParams::zeros(Architecture::TwoLayer, 2, {20});
    TrainConfig cfg = small_config(1);
    const SampleGrid grid = training_grid(circle, cfg);
    const double plain = loss(circle, spec, zero, grid, cfg);
    cfg.psi_split = true;
    CHECK(loss(circle, spec, zero, grid, cfg) == plain);
}

TEST_CASE("analytic loss gradients match finite differences") {
    struct Case {
        std::string id;
        int p;
        bool split;
        double eps;
    };
    for (const Case& c : {Case{"square", 2, false, 1e-2}, Case{"square", 1, false, 1e-2},
                          Case{"circle_compatible", 2, false, 1e-2}, Case{"circle_noncompatible", 1, true, 1e-2},
                          Case{"ellipse_4_1", 2, false, 1e-2}, Case{"nonlinear", 2, false, 1e-2},
                          Case{"time_circle", 2, false, 1e-2}}) {
        const ProblemCase pc = make_problem(c.id, c.eps);
        const AnsatzSpec spec = make_ansatz_spec(pc.problem, AnsatzKind::SingularLayer);
        TrainConfig cfg = small_config(c.p);
        cfg.psi_split = c.split;
        if (pc.problem.is_time()) cfg.n_t = 3;
        const SampleGrid grid = training_grid(pc.problem, cfg);
        const NetworkParams params = init_params(17, Architecture::TwoLayer, pc.problem.input_dim(), {6});
        const Eigen::VectorXd g = loss_gradient(pc.problem, spec, params, grid, cfg);
        const Eigen::VectorXd fd = fd_gradient(pc.problem, spec, params, grid, cfg, 1e-5);
        CAPTURE(c.id);
        CAPTURE(c.p);
        CHECK((g - fd).norm() <= 1e-5 * std::max(1.0, fd.norm()));
    }
    SUBCASE("zero parameters, p = 2") {
        const ProblemCase pc = make_problem("square", 1e-2);
        const AnsatzSpec spec = make_ansatz_spec(pc.problem, AnsatzKind::SingularLayer);
        const TrainConfig cfg = small_config(2);
        const SampleGrid grid = training_grid(pc.problem, cfg);
        const NetworkParams zero = NetworkParams::zeros(Architecture::TwoLayer, 2, {6});
        const Eigen::VectorXd g = loss_gradient(pc.problem, spec, zero, grid, cfg);
        CHECK(g.allFinite());
        CHECK((g - fd_gradient(pc.problem, spec, zero, grid, cfg, 1e-5)).norm() <= 1e-6 * std::max(1.0, g.norm()));
    }
    SUBCASE("deep baseline network") {
        const ProblemCase pc = make_problem("circle_compatible", 1e-2);
        const AnsatzSpec spec = make_ansatz_spec(pc.problem, AnsatzKind::Baseline);
        const TrainConfig cfg = small_config(2);
        const SampleGrid grid = training_grid(pc.problem, cfg);
        const NetworkParams params = init_params(5, Architecture::Deep, 2, {4, 4, 4});
        const Eigen::VectorXd g = loss_gradient(pc.problem, spec, params, grid, cfg);
        const Eigen::VectorXd fd = fd_gradient(pc.problem, spec, params, grid, cfg, 1e-5);
        CHECK((g - fd).norm() <= 1e-5 * std::max(1.0, fd.norm()));
    }
}

TEST_CASE("upper-half points carry no trace term") {
    const ProblemSpec pb = constant_forcing(DomainSpec::circle());
    const AnsatzSpec spec = make_ansatz_spec(pb, AnsatzKind::SingularLayer);
    for (double tau : {0.2, 1.0, 2.5}) {
        const ResidualStencil st = build_stencil(pb, spec, Point{0.01, tau, 0});
        for (double c : st.trace) CHECK(c == 0.0);
        CHECK(st.psi == 0.0);
    }
}

TEST_CASE("constant-sign residuals give parallel p = 1 and p = 2 gradients") {
    const ProblemSpec pb = constant_forcing(DomainSpec::channel());
    const AnsatzSpec spec = make_ansatz_spec(pb, AnsatzKind::SingularLayer);
    const NetworkParams zero = NetworkParams::zeros(Architecture::TwoLayer, 2, {8});
    const SampleGrid grid = uniform_grid(pb.domain, 8, 8);
    const Eigen::VectorXd g2 = loss_gradient(pb, spec, zero, grid, small_config(2));
    const Eigen::VectorXd g1 = loss_gradient(pb, spec, zero, grid, small_config(1));
    CHECK(g2.norm() > 0.0);
    CHECK(g1.dot(g2) / (g1.norm() * g2.norm()) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("training loop") {
    const ProblemCase pc = make_problem("square", 1e-4);
    const AnsatzSpec spec = make_ansatz_spec(pc.problem, AnsatzKind::SingularLayer);
    const NetworkParams p0 = init_params(0, Architecture::TwoLayer, 2, {20});
    TrainConfig cfg;
    cfg.n_eta = cfg.n_tau = 20;

    SUBCASE("zero iterations report the initial loss only") {
        cfg.iterations = 0;
        const TrainReport r = train(pc.problem, spec, p0, cfg);
        REQUIRE(r.history.size() == 1);
        CHECK(r.history[0].first == 0);
        CHECK(r.history[0].second == loss(pc.problem, spec, p0, training_grid(pc.problem, cfg), cfg));
        CHECK(r.params.flatten() == p0.flatten());
        CHECK(r.iterations_run == 0);
    }
    SUBCASE("loss decreases and runs are bit-identical") {
        cfg.iterations = 300;
        cfg.learning_rate = 1e-2;
        const TrainReport a = train(pc.problem, spec, p0, cfg);
        const TrainReport b = train(pc.problem, spec, p0, cfg);
        CHECK(a.history == b.history);
        CHECK(a.params.flatten() == b.params.flatten());
        CHECK(a.final_loss() < 0.5 * a.history.front().second);
        CHECK(a.history.size() == 31);
        CHECK(a.history.back().first == 300);
    }
    SUBCASE("thread count does not change the result") {
        cfg.iterations = 20;
        ::setenv("SLPINN_THREADS", "1", 1);
        const TrainReport a = train(pc.problem, spec, p0, cfg);
        ::setenv("SLPINN_THREADS", "3", 1);
        const TrainReport b = train(pc.problem, spec, p0, cfg);
        ::unsetenv("SLPINN_THREADS");
        CHECK(a.params.flatten() == b.params.flatten());
        CHECK(a.history == b.history);
    }
    SUBCASE("one gradient-descent step") {
        cfg.iterations = 1;
        cfg.optimizer = OptimizerKind::GradientDescent;
        cfg.learning_rate = 0.05;
        const SampleGrid grid = training_grid(pc.problem, cfg);
        const Eigen::VectorXd g = loss_gradient(pc.problem, spec, p0, grid, cfg);
        const TrainReport r = train(pc.problem, spec, p0, grid, cfg);
        CHECK((r.params.flatten() - (p0.flatten() - 0.05 * g)).norm() <= 1e-15 * (1 + p0.flatten().norm()));
    }
    SUBCASE("first Adam step moves every parameter by the learning rate") {
        cfg.iterations = 1;
        cfg.learning_rate = 1e-3;
        cfg.adam_epsilon = 1e-30;
        const SampleGrid grid = training_grid(pc.problem, cfg);
        const Eigen::VectorXd g = loss_gradient(pc.problem, spec, p0, grid, cfg);
        const TrainReport r = train(pc.problem, spec, p0, grid, cfg);
        const Eigen::VectorXd step = p0.flatten() - r.params.flatten();
        for (Eigen::Index k = 0; k < step.size(); ++k) {
            if (g[k] != 0.0) CHECK(step[k] == doctest::Approx(1e-3 * (g[k] > 0 ? 1 : -1)).epsilon(1e-9));
        }
    }
}

TEST_CASE("non-finite residuals abort with the last good parameters") {
    ProblemSpec pb = constant_forcing(DomainSpec::channel());
    pb.forcing = [](double x, double, double) { return x > 0.5 ? std::nan("") : 1.0; };
    const AnsatzSpec spec = make_ansatz_spec(pb, AnsatzKind::SingularLayer);
    const NetworkParams p0 = init_params(0, Architecture::TwoLayer, 2, {5});
    TrainConfig cfg = small_config();
    cfg.iterations = 10;
    const TrainReport r = train(pb, spec, p0, cfg);
    CHECK(r.aborted);
    CHECK(r.diagnostic.find("non-finite") != std::string::npos);
    CHECK(r.params.flatten() == p0.flatten());
    const LossEvaluator ev(pb, spec, training_grid(pb, cfg), cfg);
    CHECK_THROWS_AS(ev.loss(p0), NumericalError);
}

TEST_CASE("configuration validation") {
    TrainConfig c;
    c.iterations = -1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = TrainConfig{};
    c.p = 3;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = TrainConfig{};
    c.n_t = 1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    const ProblemCase tc = make_problem("time_circle", 1e-3);
    CHECK_THROWS_AS(training_grid(tc.problem, TrainConfig{}), ConfigError);
    TrainConfig t;
    t.n_eta = 5;
    t.n_tau = 6;
    t.n_t = 4;
    CHECK(training_grid(tc.problem, t).size() == 120);
}
