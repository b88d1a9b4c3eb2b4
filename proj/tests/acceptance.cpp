// Acceptance run: trains the reference experiments and runs every self-check
// suite, printing one PASS/FAIL line per criterion. Exit status is non-zero
// when any criterion fails.
//
// Training budgets are per case (the defaults of 20000 Adam iterations at
// learning rate 1e-3 unless noted); they are printed with each result.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slpinn/analysis.hpp"
#include "slpinn/checks.hpp"

using namespace slpinn;

namespace {

struct Budget {
    int iterations = 20000;
    double learning_rate = 1e-3;
};

ErrorRow train_case(const std::string& problem, double eps, Method m, Budget b) {
    SweepConfig cfg;
    cfg.train.iterations = cfg.time_train.iterations = b.iterations;
    cfg.train.learning_rate = cfg.time_train.learning_rate = b.learning_rate;
    const ErrorRow row = run_case(problem, eps, m, cfg);
    std::printf("      %-20s eps=%-6.0e %-10s %6d it  lr=%-6.0e rel_l2=%.4e  %.1f s%s\n", problem.c_str(), eps,
                method_name(m).c_str(), b.iterations, b.learning_rate, row.rel_l2, row.runtime_s,
                row.status == "ok" ? "" : ("  [" + row.status + "]").c_str());
    std::fflush(stdout);
    return row;
}

bool ok(const ErrorRow& r) { return r.status == "ok" && std::isfinite(r.rel_l2); }

int failures = 0;

void report(int id, bool pass, const std::string& text) {
    if (!pass) ++failures;
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", id, text.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

void criterion_1_2(const std::set<int>& only) {
    const Budget b;
    const ErrorRow mid = train_case("square", 1e-6, Method::SLPinnL2, b);
    if (only.count(1)) {
        report(1, ok(mid) && mid.rel_l2 <= 1e-2 && mid.runtime_s <= 300.0,
               "channel SL-PINN L2, eps=1e-6: " + fmt("rel_l2 %.3e (<= 1e-2), %.1f s (<= 300 s)", mid.rel_l2,
                                                      mid.runtime_s));
    }
    if (!only.count(2)) return;
    const ErrorRow lo = train_case("square", 1e-4, Method::SLPinnL2, b);
    const ErrorRow hi = train_case("square", 1e-8, Method::SLPinnL2, b);
    const bool all = ok(lo) && ok(mid) && ok(hi);
    const double mx = std::max({lo.rel_l2, mid.rel_l2, hi.rel_l2});
    const double mn = std::min({lo.rel_l2, mid.rel_l2, hi.rel_l2});
    report(2, all && mx <= 5.0 * mn,
           "channel eps-robustness: " + fmt("%.3e / %.3e / %.3e", lo.rel_l2, mid.rel_l2, hi.rel_l2) +
               fmt(" for eps 1e-4/1e-6/1e-8, max/min %.2f (<= 5)", mx / mn));
}

void criterion_3() {
    const ErrorRow r = train_case("circle_compatible", 1e-6, Method::SLPinnL2, Budget{});
    report(3, ok(r) && r.rel_l2 <= 2e-2,
           "circle compatible SL-PINN L2, eps=1e-6: " + fmt("rel_l2 %.3e (<= 2e-2)", r.rel_l2));
}

void criterion_4() {
    // The 4:1 ellipse needs a longer run than the default budget to settle.
    const ErrorRow a = train_case("ellipse_4_1", 1e-6, Method::SLPinnL2, Budget{100000, 1e-3});
    const ErrorRow b = train_case("ellipse_1_4", 1e-6, Method::SLPinnL2, Budget{});
    report(4, ok(a) && ok(b) && a.rel_l2 <= 2e-2 && b.rel_l2 <= 2e-2,
           "ellipses SL-PINN L2, eps=1e-6: " + fmt("4:1 rel_l2 %.3e, 1:4 rel_l2 %.3e (each <= 2e-2)", a.rel_l2,
                                                    b.rel_l2));
}

void criterion_5() {
    const ErrorRow r = train_case("nonlinear", 1e-6, Method::SLPinnL2, Budget{100000, 1e-3});
    report(5, ok(r) && r.rel_l2 <= 2e-2,
           "nonlinear circle SL-PINN L2, eps=1e-6: " + fmt("rel_l2 %.3e (<= 2e-2)", r.rel_l2));
}

void criterion_6() {
    const ErrorRow r = train_case("time_circle", 1e-6, Method::SLPinnL2, Budget{10000, 1e-3});
    report(6, ok(r) && r.rel_l2 <= 2e-2,
           "time-dependent circle SL-PINN L2, eps=1e-6, t=1 slice of a 20x20x6 grid: " +
               fmt("rel_l2 %.3e (<= 2e-2)", r.rel_l2));
}

void criterion_7() {
    // Same budget for the conventional network and the singular-layer network.
    const Budget b{5000, 1e-3};
    const ErrorRow pc = train_case("square", 1e-6, Method::PinnL2, b);
    const ErrorRow pr = train_case("circle_compatible", 1e-6, Method::PinnL2, b);
    const ErrorRow sc = train_case("square", 1e-6, Method::SLPinnL2, b);
    const ErrorRow sr = train_case("circle_compatible", 1e-6, Method::SLPinnL2, b);
    report(7, ok(pc) && ok(pr) && pc.rel_l2 >= 0.5 && pr.rel_l2 >= 0.5,
           "5-layer PINN baseline, eps=1e-6, 5000 iterations: " +
               fmt("channel rel_l2 %.3f, circle rel_l2 %.3f (each >= 0.5)", pc.rel_l2, pr.rel_l2) +
               fmt("; SL-PINN at the same budget: %.2e / %.2e", sc.rel_l2, sr.rel_l2));
}

void criterion_8() {
    bool all = true;
    int total = 0, passed = 0;
    for (const auto& name : suite_names()) {
        const SuiteReport rep = run_suite(name);
        for (const CheckResult& c : rep.checks) {
            ++total;
            passed += c.passed;
            std::printf("      %s  %-18s %-62s value=%.4g threshold=%.4g%s%s\n", c.passed ? "pass" : "FAIL",
                        name.c_str(), c.name.c_str(), c.value, c.threshold, c.detail.empty() ? "" : "  ",
                        c.detail.c_str());
        }
        all = all && rep.passed();
    }
    report(8, all, "property suite: " + std::to_string(passed) + "/" + std::to_string(total) + " checks pass");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::vector<int> only_list;
    app.add_option("--only", only_list, "Criteria to run (default: all)")->delimiter(',');
    CLI11_PARSE(app, argc, argv);
    std::set<int> only(only_list.begin(), only_list.end());
    if (only.empty()) only = {1, 2, 3, 4, 5, 6, 7, 8};

    if (only.count(8)) criterion_8();
    if (only.count(1) || only.count(2)) criterion_1_2(only);
    if (only.count(3)) criterion_3();
    if (only.count(6)) criterion_6();
    if (only.count(4)) criterion_4();
    if (only.count(5)) criterion_5();
    if (only.count(7)) criterion_7();

    std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
