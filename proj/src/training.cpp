#include "slpinn/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "slpinn/error.hpp"

namespace slpinn {

namespace {

constexpr std::size_t kBlockSize = 512;
constexpr std::size_t kNoTrace = std::numeric_limits<std::size_t>::max();
constexpr double kSubgradientZero = 1e-12;

std::string describe(const Point& p) {
    std::ostringstream os;
    os << "(" << p[0] << ", " << p[1] << ", " << p[2] << ")";
    return os.str();
}

double dot(const BundleVector& a, const DerivativeBundle& b) {
    const BundleVector f = b.flat();
    double s = 0.0;
    for (int e = 0; e < kBundleSize; ++e) s += a[e] * f[e];
    return s;
}

}  // namespace

void TrainConfig::validate() const {
    if (p != 1 && p != 2) throw ConfigError("p must be 1 or 2");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be positive");
    if (iterations < 0) throw ConfigError("iterations must be non-negative");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("Adam betas must lie in [0, 1)");
    if (!(adam_epsilon > 0.0)) throw ConfigError("adam_epsilon must be positive");
    if (n_eta < 1 || n_tau < 1) throw ConfigError("grid sizes must be positive");
    if (n_t < 0 || n_t == 1) throw ConfigError("n_t must be 0 (steady) or at least 2");
    if (log_every < 1) throw ConfigError("log_every must be at least 1");
}

int worker_threads() {
    if (const char* env = std::getenv("SLPINN_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

LossEvaluator::LossEvaluator(const ProblemSpec& problem, const AnsatzSpec& spec, const SampleGrid& grid,
                             const TrainConfig& cfg)
    : problem_(problem), spec_(spec), p_(cfg.p), points_(grid.points) {
    if (points_.empty()) throw DimensionError("the collocation grid is empty");
    if (cfg.p != 1 && cfg.p != 2) throw ConfigError("p must be 1 or 2");
    problem_.validate();
    const int dim = problem_.input_dim();
    stencils_.reserve(points_.size());
    split_.resize(points_.size(), false);
    for (std::size_t i = 0; i < points_.size(); ++i) {
        stencils_.push_back(build_stencil(problem_, spec_, points_[i]));
        split_[i] = cfg.psi_split && problem_.domain.is_polar() && spec_.kind == AnsatzKind::SingularLayer &&
                    in_lower_half(points_[i][1]);
    }
    for (std::size_t begin = 0; begin < points_.size(); begin += kBlockSize) {
        Block b;
        b.begin = begin;
        b.end = std::min(points_.size(), begin + kBlockSize);
        for (std::size_t i = b.begin; i < b.end; ++i) b.inputs.push_back(network_input(problem_.domain, points_[i], dim));
        std::map<Point, std::size_t> unique;
        for (std::size_t i = b.begin; i < b.end; ++i) {
            if (!stencils_[i].uses_trace) {
                b.trace_slot.push_back(kNoTrace);
                continue;
            }
            const Point in = network_input(problem_.domain, trace_point(spec_, points_[i]), dim);
            auto [it, inserted] = unique.emplace(in, b.inputs.size());
            if (inserted) b.inputs.push_back(in);
            b.trace_slot.push_back(it->second);
        }
        blocks_.push_back(std::move(b));
    }
}

LossEvaluator::BlockResult LossEvaluator::evaluate_block(const NetworkParams& params, const Block& b,
                                                         bool with_gradient,
                                                         std::vector<double>* residual_out) const {
    BatchEvaluation batch(params, b.inputs);
    const auto& bundles = batch.bundles();
    BlockResult out;
    std::vector<BundleVector> adjoints;
    if (with_gradient) adjoints.assign(b.inputs.size(), BundleVector{});
    for (std::size_t i = b.begin; i < b.end; ++i) {
        const std::size_t local = i - b.begin;
        const ResidualStencil& st = stencils_[i];
        const DerivativeBundle& B = bundles[local];
        const std::size_t ts = b.trace_slot[local];
        const DerivativeBundle* Bt = ts == kNoTrace ? nullptr : &bundles[ts];
        double r = dot(st.point, B) - st.rhs;
        if (Bt) r += dot(st.trace, *Bt);
        double v = 0.0;
        if (st.cubic) {
            v = dot(st.value_point, B) + (Bt ? dot(st.value_trace, *Bt) : 0.0);
            r += v * v * v;
        }
        if (split_[i] && Bt) r -= st.psi * Bt->value;
        if (!std::isfinite(r)) throw NumericalError("non-finite residual at point " + describe(points_[i]));
        if (residual_out) (*residual_out)[i] = r;
        const double ar = std::abs(r);
        out.power_sum += p_ == 2 ? r * r : ar;
        if (!with_gradient) continue;
        // Unscaled adjoint dL/dr: r for p = 2 (scaled later by 1/(N L)), sign(r) for p = 1.
        const double w = p_ == 2 ? r : (ar < kSubgradientZero ? 0.0 : (r > 0.0 ? 1.0 : -1.0));
        if (w == 0.0) continue;
        const double cube = st.cubic ? 3.0 * v * v : 0.0;
        BundleVector& ap = adjoints[local];
        for (int e = 0; e < kBundleSize; ++e) ap[e] += w * (st.point[e] + cube * st.value_point[e]);
        if (Bt) {
            BundleVector& at = adjoints[ts];
            for (int e = 0; e < kBundleSize; ++e) at[e] += w * (st.trace[e] + cube * st.value_trace[e]);
            if (split_[i]) at[0] -= w * st.psi;
        }
    }
    if (with_gradient) {
        out.grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(params.parameter_count()));
        batch.backward(adjoints, out.grad);
    }
    return out;
}

std::vector<LossEvaluator::BlockResult> LossEvaluator::evaluate(const NetworkParams& params, bool with_gradient,
                                                                std::vector<double>* residual_out) const {
    std::vector<BlockResult> parts(blocks_.size());
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(worker_threads()), blocks_.size());
    if (workers <= 1) {
        for (std::size_t k = 0; k < blocks_.size(); ++k)
            parts[k] = evaluate_block(params, blocks_[k], with_gradient, residual_out);
        return parts;
    }
    // Fixed block partition; each block's result lands in its own slot so the
    // reduction order (and hence the result) does not depend on the thread count.
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t k = w; k < blocks_.size(); k += workers)
                    parts[k] = evaluate_block(params, blocks_[k], with_gradient, residual_out);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return parts;
}

double LossEvaluator::finish_loss(const std::vector<BlockResult>& parts) const {
    double total = 0.0;
    for (const auto& part : parts) total += part.power_sum;
    const double mean = total / static_cast<double>(points_.size());
    return p_ == 2 ? std::sqrt(mean) : mean;
}

std::vector<double> LossEvaluator::residuals(const NetworkParams& params) const {
    std::vector<double> r(points_.size(), 0.0);
    evaluate(params, false, &r);
    return r;
}

double LossEvaluator::loss(const NetworkParams& params) const { return finish_loss(evaluate(params, false, nullptr)); }

double LossEvaluator::loss_and_gradient(const NetworkParams& params, Eigen::VectorXd& grad) const {
    const auto parts = evaluate(params, true, nullptr);
    const double L = finish_loss(parts);
    grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(params.parameter_count()));
    for (const auto& part : parts) grad += part.grad;
    const double n = static_cast<double>(points_.size());
    if (p_ == 2) {
        if (L > 0.0) {
            grad /= n * L;
        } else {
            grad.setZero();
        }
    } else {
        grad /= n;
    }
    return L;
}

double loss(const ProblemSpec& problem, const AnsatzSpec& spec, const NetworkParams& params, const SampleGrid& grid,
            const TrainConfig& cfg) {
    return LossEvaluator(problem, spec, grid, cfg).loss(params);
}

Eigen::VectorXd loss_gradient(const ProblemSpec& problem, const AnsatzSpec& spec, const NetworkParams& params,
                              const SampleGrid& grid, const TrainConfig& cfg) {
    Eigen::VectorXd g;
    LossEvaluator(problem, spec, grid, cfg).loss_and_gradient(params, g);
    return g;
}

SampleGrid training_grid(const ProblemSpec& problem, const TrainConfig& cfg) {
    if (problem.is_time()) {
        if (cfg.n_t < 2) throw ConfigError("time problems need n_t >= 2");
        return uniform_grid(problem.domain, cfg.n_eta, cfg.n_tau, cfg.n_t, problem.T);
    }
    return uniform_grid(problem.domain, cfg.n_eta, cfg.n_tau);
}

TrainReport train(const ProblemSpec& problem, const AnsatzSpec& spec, const NetworkParams& params0,
                  const SampleGrid& grid, const TrainConfig& cfg) {
    cfg.validate();
    params0.validate();
    const auto start = std::chrono::steady_clock::now();
    const LossEvaluator evaluator(problem, spec, grid, cfg);

    TrainReport report;
    report.seed = cfg.seed;
    NetworkParams current = params0;
    Eigen::VectorXd theta = current.flatten();
    const Eigen::Index n = theta.size();
    Eigen::VectorXd m = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd grad;
    Eigen::VectorXd last_good = theta;

    auto abort_with = [&](const std::string& why) {
        report.aborted = true;
        report.diagnostic = why;
        current.assign(last_good);
    };

    double b1t = 1.0;
    double b2t = 1.0;
    int k = 0;
    for (; k < cfg.iterations; ++k) {
        current.assign(theta);
        double L = 0.0;
        try {
            L = evaluator.loss_and_gradient(current, grad);
        } catch (const NumericalError& e) {
            abort_with(std::string(e.what()) + " at iteration " + std::to_string(k));
            break;
        }
        if (!std::isfinite(L) || !grad.allFinite()) {
            abort_with("non-finite loss or gradient at iteration " + std::to_string(k));
            break;
        }
        last_good = theta;
        if (k % cfg.log_every == 0) report.history.emplace_back(k, L);
        if (cfg.optimizer == OptimizerKind::Adam) {
            b1t *= cfg.beta1;
            b2t *= cfg.beta2;
            m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
            v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseAbs2();
            const double c1 = 1.0 / (1.0 - b1t);
            const double c2 = 1.0 / (1.0 - b2t);
            theta.array() -= cfg.learning_rate * (m.array() * c1) / ((v.array() * c2).sqrt() + cfg.adam_epsilon);
        } else {
            theta -= cfg.learning_rate * grad;
        }
    }
    report.iterations_run = k;
    if (!report.aborted) {
        current.assign(theta);
        try {
            const double L = evaluator.loss(current);
            if (std::isfinite(L)) {
                report.history.emplace_back(k, L);
            } else {
                abort_with("non-finite loss after the final update");
            }
        } catch (const NumericalError& e) {
            abort_with(e.what());
        }
    }
    report.params = current;
    report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

TrainReport train(const ProblemSpec& problem, const AnsatzSpec& spec, const NetworkParams& params0,
                  const TrainConfig& cfg) {
    cfg.validate();
    return train(problem, spec, params0, training_grid(problem, cfg), cfg);
}

}  // namespace slpinn
