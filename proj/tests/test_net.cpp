#include <doctest.h>

#include <array>
#include <cmath>

#include "slpinn/error.hpp"
#include "slpinn/net.hpp"
#include "test_util.hpp"

using namespace slpinn;
using slpinn::test::fd1;
using slpinn::test::fd2;
using slpinn::test::rel_diff;

namespace {

double value_at(const NetworkParams& p, double x, double y) {
    const std::array<double, 2> pt{x, y};
    return eval_network(p, pt).value;
}

}  // namespace

TEST_CASE("zero network has a zero bundle") {
    const NetworkParams p = NetworkParams::zeros(Architecture::TwoLayer, 2, {20});
    const std::array<double, 2> pt{0.3, -0.8};
    const DerivativeBundle b = eval_network(p, pt);
    CHECK(b.value == 0.0);
    for (double d : b.d1) CHECK(d == 0.0);
    for (double d : b.d2) CHECK(d == 0.0);
}

TEST_CASE("single neuron with zero weights is the constant one half") {
    NetworkParams p = NetworkParams::zeros(Architecture::TwoLayer, 2, {1});
    p.output_weights[0] = 1.0;
    const std::array<double, 2> pt{0.7, 0.1};
    const DerivativeBundle b = eval_network(p, pt);
    CHECK(b.value == doctest::Approx(0.5).epsilon(1e-15));
    for (double d : b.d1) CHECK(d == 0.0);
    for (double d : b.d2) CHECK(d == 0.0);
}

TEST_CASE("two-layer network is sum_j c_j sigma(w1j x + w2j y + b_j)") {
    const NetworkParams p = test::random_two_layer(5);
    const double x = -0.4, y = 0.9;
    double expected = 0.0;
    for (int j = 0; j < 20; ++j) {
        const double z = p.weights[0](j, 0) * x + p.weights[0](j, 1) * y + p.biases[0][j];
        expected += p.output_weights[j] / (1.0 + std::exp(-z));
    }
    CHECK(value_at(p, x, y) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("input derivatives match finite differences") {
    // First partials by differencing the value, second partials by differencing the first partials.
    for (Architecture arch : {Architecture::TwoLayer, Architecture::Deep}) {
        NetworkParams p = arch == Architecture::TwoLayer ? test::random_two_layer(11)
                                                         : init_params(11, Architecture::Deep, 2, {8, 8, 8});
        const double x = 0.3, y = 0.7, h = 1e-4;
        auto bundle = [&](double xx, double yy) {
            const std::array<double, 2> pt{xx, yy};
            return eval_network(p, pt);
        };
        const DerivativeBundle b = bundle(x, y);
        CHECK(rel_diff(b.d1[0], fd1([&](double s) { return value_at(p, s, y); }, x, h)) <= 1e-6);
        CHECK(rel_diff(b.d1[1], fd1([&](double s) { return value_at(p, x, s); }, y, h)) <= 1e-6);
        CHECK(rel_diff(b.second(0, 0), fd1([&](double s) { return bundle(s, y).d1[0]; }, x, h)) <= 1e-6);
        CHECK(rel_diff(b.second(1, 1), fd1([&](double s) { return bundle(x, s).d1[1]; }, y, h)) <= 1e-6);
        CHECK(rel_diff(b.second(0, 1), fd1([&](double s) { return bundle(x, s).d1[0]; }, y, h)) <= 1e-6);
        CHECK(rel_diff(b.second(0, 1), fd1([&](double s) { return bundle(s, y).d1[1]; }, x, h)) <= 1e-6);
        // Pure value differencing as a coarser cross-check of the second partials.
        CHECK(rel_diff(b.second(0, 0), fd2([&](double s) { return value_at(p, s, y); }, x, 1e-3)) <= 1e-4);
    }
}

TEST_CASE("three-input network has time derivatives") {
    const NetworkParams p = test::random_two_layer(3, 3);
    const double x = 0.2, y = -0.1, t = 0.6, h = 1e-4;
    auto f = [&](double s) {
        const std::array<double, 3> pt{x, y, s};
        return eval_network(p, pt).value;
    };
    const std::array<double, 3> pt{x, y, t};
    const DerivativeBundle b = eval_network(p, pt);
    CHECK(rel_diff(b.d1[2], fd1(f, t, h)) <= 1e-6);
    auto ft = [&](double s) {
        const std::array<double, 3> q{x, y, s};
        return eval_network(p, q).d1[2];
    };
    CHECK(rel_diff(b.second(2, 2), fd1(ft, t, h)) <= 1e-6);
}

TEST_CASE("parameter gradients of the bundle") {
    SUBCASE("output weight gradient is the hidden activation") {
        const NetworkParams p = test::random_two_layer(2);
        const std::array<double, 2> pt{0.1, 0.5};
        const Eigen::MatrixXd G = param_gradient_of_bundle(p, pt);
        const std::size_t c0 = 3 * 20;  // flat order (w1, w2, b, c)
        for (int j = 0; j < 20; ++j) {
            const double z = p.weights[0](j, 0) * 0.1 + p.weights[0](j, 1) * 0.5 + p.biases[0][j];
            CHECK(G(c0 + j, 0) == doctest::Approx(1.0 / (1.0 + std::exp(-z))).epsilon(1e-14));
        }
    }
    SUBCASE("all-zero parameters") {
        const NetworkParams p = NetworkParams::zeros(Architecture::TwoLayer, 2, {20});
        const std::array<double, 2> pt{0.4, 0.2};
        const Eigen::MatrixXd G = param_gradient_of_bundle(p, pt);
        for (int j = 0; j < 20; ++j) {
            CHECK(G(60 + j, 0) == doctest::Approx(0.5));
            CHECK(G(40 + j, 0) == 0.0);
        }
    }
    SUBCASE("finite differences in every parameter") {
        for (Architecture arch : {Architecture::TwoLayer, Architecture::Deep}) {
            const NetworkParams p = arch == Architecture::TwoLayer ? test::random_two_layer(9)
                                                                   : init_params(9, Architecture::Deep, 2, {6, 5, 4});
            const std::array<double, 2> pt{0.3, 0.7};
            const Eigen::MatrixXd G = param_gradient_of_bundle(p, pt);
            const Eigen::VectorXd theta = p.flatten();
            double worst = 0.0;
            for (Eigen::Index k = 0; k < theta.size(); ++k) {
                auto entry = [&](double s, int e) {
                    NetworkParams q = p;
                    Eigen::VectorXd th = theta;
                    th[k] = s;
                    q.assign(th);
                    return eval_network(q, pt).flat()[e];
                };
                for (int e = 0; e < kBundleSize; ++e) {
                    const double fd = fd1([&](double s) { return entry(s, e); }, theta[k], 1e-4);
                    // Relative error with an absolute floor for entries that vanish.
                    worst = std::max(worst, rel_diff(G(k, e), fd, 1e-4));
                }
            }
            CHECK(worst <= 1e-6);
        }
    }
}

TEST_CASE("batched backward pass equals the per-point gradients") {
    const NetworkParams p = init_params(4, Architecture::Deep, 2, {7, 7});
    std::vector<Point> pts;
    for (int i = 0; i < 40; ++i) pts.push_back(Point{0.05 * i - 1.0, 0.3 - 0.02 * i, 0.0});
    BatchEvaluation batch(p, pts);
    std::vector<BundleVector> adj(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (int e = 0; e < kBundleSize; ++e) adj[i][e] = std::sin(1.0 + i + 3.0 * e);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.parameter_count()));
    batch.backward(adj, grad);

    Eigen::VectorXd expected = Eigen::VectorXd::Zero(grad.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::array<double, 2> pt{pts[i][0], pts[i][1]};
        const Eigen::MatrixXd G = param_gradient_of_bundle(p, pt);
        for (int e = 0; e < kBundleSize; ++e) expected += adj[i][e] * G.col(e);
        CHECK(batch.bundles()[i].value == doctest::Approx(eval_network(p, pt).value).epsilon(1e-13));
    }
    CHECK((grad - expected).norm() <= 1e-11 * (1.0 + expected.norm()));
}

TEST_CASE("initialization") {
    const NetworkParams a = init_params(0, Architecture::TwoLayer, 2, {20});
    const NetworkParams b = init_params(0, Architecture::TwoLayer, 2, {20});
    const NetworkParams c = init_params(1, Architecture::TwoLayer, 2, {20});
    CHECK(a.flatten() == b.flatten());
    CHECK(a.flatten() != c.flatten());
    CHECK(a.parameter_count() == 80);
    const double bound = 1.0 / std::sqrt(2.0);
    CHECK(a.weights[0].cwiseAbs().maxCoeff() <= bound);
    const NetworkParams deep = init_params(0, Architecture::Deep, 2, {30, 30, 30, 30, 30});
    CHECK(deep.parameter_count() == 2 * 30 + 30 + 4 * (30 * 30 + 30) + 30);
}

TEST_CASE("invalid parameters are rejected") {
    NetworkParams p = init_params(0, Architecture::TwoLayer, 2, {4});
    p.output_weights[1] = std::nan("");
    CHECK_THROWS_AS(p.validate(), DomainError);
    CHECK_THROWS(init_params(0, Architecture::TwoLayer, 2, {0}));
    const NetworkParams q = init_params(0, Architecture::TwoLayer, 2, {4});
    const std::array<double, 3> wrong{0.0, 0.0, 0.0};
    CHECK_THROWS_AS(eval_network(q, wrong), DimensionError);
}
