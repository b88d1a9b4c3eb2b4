#pragma once

// Experiment configuration files and artifact output.
//
// Config files are INI-like: `[section]` headers, `key = value` lines, `#` or
// `;` comments. Unknown sections or keys are rejected.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "slpinn/analysis.hpp"
#include "slpinn/problems.hpp"
#include "slpinn/training.hpp"

namespace slpinn {

struct ExperimentConfig {
    // [problem]
    std::string name = "square";  // registry id, or "custom"
    std::string domain = "circle";  // custom: channel | circle | ellipse
    double A = 1.0;                 // custom ellipse semi-axes
    double B = 1.0;
    std::string variant = "linear";  // custom: linear | time | cubic
    std::string forcing;             // custom: expression in x, y, t
    double epsilon = 1e-6;
    double T = 1.0;
    std::string amplitude = "sqrt(1-x^2)";
    std::string rhs = "HF";  // HF | F (ellipses)

    // [method]
    Method method = Method::SLPinnL2;
    int width = 20;
    std::vector<int> baseline_widths{30, 30, 30, 30, 30};
    std::string psi_split = "auto";  // auto (on for L1 training of circle/ellipse) | true | false

    // [train]
    TrainConfig train;  // p comes from the method; psi_split from [method]

    // [output]
    std::string output_dir = "slpinn_out";
    bool fine_grid = false;  // also export a 200 x 200 evaluation grid

    // [sweep]
    std::vector<std::string> sweep_problems;
    std::vector<double> sweep_epsilons{1e-4, 1e-6, 1e-8};
    std::vector<Method> sweep_methods{Method::PinnL2, Method::SLPinnL2, Method::SLPinnL1};

    ExperimentConfig();
};

/// Throws ConfigError naming the offending line/key.
ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Every key with its current value, in a form parse_config accepts.
std::string dump_config(const ExperimentConfig& cfg);

/// Problem with its reference (registry entry or custom definition).
ProblemCase resolve_problem(const ExperimentConfig& cfg);

/// Training configuration for the resolved problem and method.
TrainConfig resolve_train(const ExperimentConfig& cfg, const ProblemSpec& problem);

/// Sweep settings derived from the experiment configuration.
SweepConfig resolve_sweep(const ExperimentConfig& cfg);

/// Write through a temporary file in the same directory, then rename.
void atomic_write(const std::filesystem::path& path, const std::string& content);

nlohmann::json to_json(const TrainReport& report);
nlohmann::json to_json(const NetworkParams& params);

/// CSV of grid coordinates (plus x, y on polar grids), predicted, reference, abs_error and an
/// in_metric flag (rows entering the relative error).
std::string field_csv(const SampleGrid& grid, const std::vector<double>& predicted,
                      const std::vector<double>& reference, const std::vector<bool>& in_metric);

/// Relative L2 error recomputed from a field CSV (rows with in_metric = 1).
double relative_error_from_field_csv(std::istream& in);

}  // namespace slpinn
