#pragma once

// Residual losses, their exact parameter gradients and the optimization loop.
//
// The residual at every collocation point is an affine function of the
// network bundles at the point and at its trace point (plus a cube for the
// nonlinear variant), so the geometric stencils are built once per grid and
// reused by every loss/gradient evaluation.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "slpinn/correctors.hpp"
#include "slpinn/domains.hpp"
#include "slpinn/net.hpp"
#include "slpinn/residuals.hpp"

namespace slpinn {

enum class OptimizerKind { Adam, GradientDescent };

struct TrainConfig {
    int p = 2;
    double learning_rate = 1e-3;
    int iterations = 20000;
    OptimizerKind optimizer = OptimizerKind::Adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 0;
    bool psi_split = false;
    int n_eta = 50;
    int n_tau = 50;
    int n_t = 0;
    int log_every = 10;

    /// Throws ConfigError. iterations = 0 is accepted and only logs the initial loss.
    void validate() const;
};

struct TrainReport {
    NetworkParams params;
    std::vector<std::pair<int, double>> history;  // (iteration, loss)
    double wall_time_s = 0.0;
    std::uint64_t seed = 0;
    int iterations_run = 0;
    bool aborted = false;
    std::string diagnostic;

    double final_loss() const { return history.empty() ? 0.0 : history.back().second; }
};

/// Loss and gradient evaluator for one (problem, ansatz, grid, p, split) combination.
class LossEvaluator {
public:
    LossEvaluator(const ProblemSpec& problem, const AnsatzSpec& spec, const SampleGrid& grid,
                  const TrainConfig& cfg);

    /// Residuals r_i (with psi removed on split points), in grid order.
    std::vector<double> residuals(const NetworkParams& params) const;
    double loss(const NetworkParams& params) const;
    /// Returns the loss and overwrites grad with its gradient.
    double loss_and_gradient(const NetworkParams& params, Eigen::VectorXd& grad) const;

    std::size_t size() const { return points_.size(); }

private:
    struct Block {
        std::size_t begin = 0;
        std::size_t end = 0;
        std::vector<Point> inputs;        // point inputs followed by unique trace inputs
        std::vector<std::size_t> trace_slot;  // per point: index into inputs (or npos)
    };
    struct BlockResult {
        double power_sum = 0.0;  // sum |r|^p
        Eigen::VectorXd grad;    // sum of adjoint-weighted gradients (unscaled)
    };

    BlockResult evaluate_block(const NetworkParams& params, const Block& b, bool with_gradient,
                               std::vector<double>* residual_out) const;
    std::vector<BlockResult> evaluate(const NetworkParams& params, bool with_gradient,
                                      std::vector<double>* residual_out) const;
    double finish_loss(const std::vector<BlockResult>& parts) const;

    ProblemSpec problem_;
    AnsatzSpec spec_;
    int p_ = 2;
    std::vector<Point> points_;
    std::vector<ResidualStencil> stencils_;
    std::vector<bool> split_;
    std::vector<Block> blocks_;
};

double loss(const ProblemSpec& problem, const AnsatzSpec& spec, const NetworkParams& params, const SampleGrid& grid,
            const TrainConfig& cfg);

Eigen::VectorXd loss_gradient(const ProblemSpec& problem, const AnsatzSpec& spec, const NetworkParams& params,
                              const SampleGrid& grid, const TrainConfig& cfg);

/// Training grid for a problem from the grid sizes of cfg.
SampleGrid training_grid(const ProblemSpec& problem, const TrainConfig& cfg);

TrainReport train(const ProblemSpec& problem, const AnsatzSpec& spec, const NetworkParams& params0,
                  const SampleGrid& grid, const TrainConfig& cfg);

TrainReport train(const ProblemSpec& problem, const AnsatzSpec& spec, const NetworkParams& params0,
                  const TrainConfig& cfg);

/// Worker count: SLPINN_THREADS if set (>= 1), otherwise the hardware concurrency.
int worker_threads();

}  // namespace slpinn
