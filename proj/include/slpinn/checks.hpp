#pragma once

// Self-check suites: derivative/gradient oracles, expansion equivalence,
// boundary exactness, corrector norm scalings, exponential mass and the
// compatibility classifier. Each suite returns named pass/fail entries with
// the measured value and its threshold.

#include <string>
#include <vector>

#include <json.hpp>

namespace slpinn {

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct SuiteReport {
    std::string suite;
    std::vector<CheckResult> checks;
    bool passed() const;
};

/// Suite names: gradients, residual-equivalence, boundary-exactness,
/// lemma-scaling, l1-mass, compatibility.
std::vector<std::string> suite_names();

/// Throws ConfigError for an unknown suite.
SuiteReport run_suite(const std::string& name);

nlohmann::json to_json(const SuiteReport& report);

}  // namespace slpinn
