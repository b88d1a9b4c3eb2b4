#pragma once

// Error metrics, epsilon sweeps and numerical checks of the corrector norm
// scalings.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slpinn/domains.hpp"
#include "slpinn/problems.hpp"
#include "slpinn/training.hpp"

namespace slpinn {

/// sqrt(sum w (pred - ref)^2) / sqrt(sum w ref^2); unit weights when weights is empty.
double relative_l2_error(std::span<const double> predicted, std::span<const double> reference,
                         std::span<const double> weights = {});

/// Ansatz prediction and reference on a grid. Time problems keep only the t = T slice.
struct FieldEvaluation {
    std::vector<std::size_t> indices;  // grid indices kept
    std::vector<double> predicted;
    std::vector<double> reference;
};

FieldEvaluation evaluate_field(const ProblemCase& problem, const AnsatzSpec& spec, const NetworkParams& params,
                               const SampleGrid& grid);

/// Trace amplitude a(tau) with its first two tau-derivatives.
using TraceAmplitude = std::function<std::array<double, 3>(double tau)>;

/// Amplitude u0(boundary(tau)) of the limit solution of f, differentiated by
/// fourth-order central differences in tau.
TraceAmplitude limit_trace_amplitude(const DomainSpec& domain, const ForcingFn& f);

struct LemmaScaling {
    std::vector<double> epsilons;
    std::vector<double> norms;
    bool fitted = false;
    double slope = 0.0;
    double intercept = 0.0;
    double fit_residual = 0.0;  // RMS of log-norm residuals
};

/// L^p norm over the layer half of |sin tau|^{-l} (eta/eps)^n d^{s+m} phi / d eta^s d tau^m,
/// phi = -a(tau) exp(k sin(tau) eta / eps) delta(eta), and the log-log slope in eps.
/// refinement >= 1 multiplies the quadrature resolution.
LemmaScaling lemma_norm_scaling(const DomainSpec& domain, const std::vector<double>& epsilons, int l, int n, int s,
                                int m, double p_norm, const TraceAmplitude& amplitude, int refinement = 1);

struct ExponentialMass {
    std::vector<double> epsilons;
    std::vector<double> values;
    double max = 0.0;
    double min = 0.0;
    double ratio() const { return min > 0.0 ? max / min : 0.0; }
};

/// Integral of (1/eps) exp(coefficient k sin(tau) eta / eps) over the layer
/// half (or over the upper half, where the layer indicator vanishes).
ExponentialMass scaled_exponential_l1_mass(const DomainSpec& domain, const std::vector<double>& epsilons,
                                           double coefficient = 1.0, bool upper_half = false);

/// Mean of (1/eps) exp(k sin(tau) eta / eps) over the lower-half points of a grid.
double grid_exponential_average(const SampleGrid& grid, double eps);

enum class Method { SLPinnL1, SLPinnL2, PinnL2 };

std::string method_name(Method m);
Method parse_method(const std::string& name);

struct ErrorRow {
    std::string problem;
    double epsilon = 0.0;
    Method method = Method::SLPinnL2;
    double rel_l2 = 0.0;  // NaN for failed rows
    double runtime_s = 0.0;
    std::uint64_t seed = 0;
    std::string status = "ok";  // ok, aborted: ..., failed: ...
};

struct ErrorReport {
    std::vector<ErrorRow> rows;

    /// Registry order of problems, then decreasing epsilon, then method.
    void sort();
    /// Columns problem, epsilon, method, rel_l2, runtime_s, seed.
    void write_csv(std::ostream& os) const;
    /// Three sub-tables (PINN L2, SL-PINN L2, SL-PINN L1), problems as columns, epsilon as rows.
    std::string render_table() const;
    const ErrorRow* find(const std::string& problem, double eps, Method m) const;
};

struct SweepConfig {
    TrainConfig train;                         // p and psi_split are set per method
    int width = 20;                            // two-layer hidden width
    std::vector<int> baseline_widths{30, 30, 30, 30, 30};
    TrainConfig time_train;                    // grid/budget for time problems (n_t >= 2)
    ProblemOptions options;

    SweepConfig();
};

/// Training configuration used for one method (p, psi_split, grid).
TrainConfig method_config(const SweepConfig& cfg, const ProblemSpec& problem, Method m);

/// Train one (problem, eps, method) combination and report its error.
ErrorRow run_case(const std::string& problem, double eps, Method m, const SweepConfig& cfg,
                  TrainReport* report_out = nullptr);

/// Every combination; failures become rows, they never abort the sweep.
ErrorReport epsilon_sweep(const std::vector<std::string>& problems, const std::vector<double>& epsilons,
                          const std::vector<Method>& methods, const SweepConfig& cfg,
                          const std::function<void(const ErrorRow&)>& progress = {});

}  // namespace slpinn
