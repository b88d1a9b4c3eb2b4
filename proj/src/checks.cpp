#include "slpinn/checks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "slpinn/analysis.hpp"
#include "slpinn/correctors.hpp"
#include "slpinn/error.hpp"
#include "slpinn/reference.hpp"
#include "slpinn/residuals.hpp"
#include "slpinn/training.hpp"

namespace slpinn {

namespace {

constexpr double kPi = std::numbers::pi;

CheckResult below(std::string name, double value, double threshold, std::string detail = {}) {
    CheckResult r;
    r.name = std::move(name);
    r.value = value;
    r.threshold = threshold;
    r.passed = std::isfinite(value) && value <= threshold;
    r.detail = std::move(detail);
    return r;
}

/// |a - b| relative to |b|, or absolute when |b| is below floor.
double rel_err(double a, double b, double floor) { return std::abs(a - b) / std::max(std::abs(b), floor); }

NetworkParams random_params(std::mt19937_64& rng, Architecture arch, int dim, std::vector<int> widths) {
    NetworkParams p = init_params(rng(), arch, dim, std::move(widths));
    Eigen::VectorXd flat = p.flatten();
    std::normal_distribution<double> n(0.0, 0.5);
    for (Eigen::Index i = 0; i < flat.size(); ++i) flat[i] += n(rng);
    p.assign(flat);
    return p;
}

// ---------------------------------------------------------------- gradients

/// Input derivatives and parameter gradients of the bundle against central differences.
double network_fd_error(const NetworkParams& params, const Point& x, int dim) {
    const double h = 1e-4;
    double worst = 0.0;
    auto bundle = [&](const NetworkParams& pr, const Point& q) {
        return eval_network(pr, std::span<const double>(q.data(), static_cast<std::size_t>(dim)));
    };
    auto tol_err = [](double a, double b) {
        // relative error, or absolute error scaled to the relative budget when the reference is small
        return std::abs(b) < 1e-3 ? std::abs(a - b) * 1e-6 / 1e-9 : std::abs(a - b) / std::abs(b);
    };
    const DerivativeBundle b0 = bundle(params, x);
    for (int i = 0; i < dim; ++i) {
        Point xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const DerivativeBundle bp = bundle(params, xp), bm = bundle(params, xm);
        worst = std::max(worst, tol_err(b0.d1[i], (bp.value - bm.value) / (2 * h)));
        for (int k = 0; k < dim; ++k)
            worst = std::max(worst, tol_err(b0.second(i, k), (bp.d1[k] - bm.d1[k]) / (2 * h)));
    }
    const Eigen::MatrixXd G =
        param_gradient_of_bundle(params, std::span<const double>(x.data(), static_cast<std::size_t>(dim)));
    const Eigen::VectorXd theta = params.flatten();
    NetworkParams work = params;
    for (Eigen::Index pi = 0; pi < theta.size(); ++pi) {
        Eigen::VectorXd t = theta;
        t[pi] += h;
        work.assign(t);
        const BundleVector fp = bundle(work, x).flat();
        t[pi] -= 2 * h;
        work.assign(t);
        const BundleVector fm = bundle(work, x).flat();
        for (int e = 0; e < kBundleSize; ++e) worst = std::max(worst, tol_err(G(pi, e), (fp[e] - fm[e]) / (2 * h)));
    }
    return worst;
}

struct LossCase {
    std::string name;
    ProblemSpec problem;
    AnsatzKind kind = AnsatzKind::SingularLayer;
};

std::vector<LossCase> loss_cases() {
    auto base = [](DomainSpec d, double eps, ForcingFn f) {
        ProblemSpec p;
        p.domain = d;
        p.epsilon = eps;
        p.forcing = std::move(f);
        return p;
    };
    std::vector<LossCase> out;
    out.push_back({"channel", base(DomainSpec::channel(), 0.05, [](double x, double, double) {
                       return std::sin(2 * kPi * x);
                   })});
    out.push_back({"circle", base(DomainSpec::circle(), 0.05, [](double, double, double) { return 1.0; })});
    ProblemSpec tp = base(DomainSpec::circle(), 0.05, time_circle_forcing(0.05));
    tp.variant = Variant::TimeDependent;
    out.push_back({"circle-time", tp});
    ProblemSpec cp = base(DomainSpec::circle(), 0.05, [](double x, double, double) { return 1.0 + x; });
    cp.variant = Variant::NonlinearCubic;
    out.push_back({"circle-cubic", cp});
    out.push_back({"ellipse-x", base(DomainSpec::ellipse(4, 1), 0.05, [](double x, double, double) {
                       return std::pow(1 - x * x / 16, 2);
                   })});
    out.push_back({"ellipse-y", base(DomainSpec::ellipse(1, 4), 0.05, [](double x, double, double) {
                       return std::pow(1 - x * x, 2) / 4;
                   })});
    LossCase bl{"channel-baseline", out[0].problem, AnsatzKind::Baseline};
    out.push_back(bl);
    LossCase bc{"circle-baseline", out[1].problem, AnsatzKind::Baseline};
    out.push_back(bc);
    return out;
}

/// Max over parameters of |analytic - FD| / max(|FD|, 1e-3 max|FD|).
double loss_fd_error(const LossEvaluator& ev, const NetworkParams& params, double h) {
    Eigen::VectorXd g;
    ev.loss_and_gradient(params, g);
    const Eigen::VectorXd theta = params.flatten();
    Eigen::VectorXd fd(theta.size());
    NetworkParams work = params;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        Eigen::VectorXd t = theta;
        t[i] += h;
        work.assign(t);
        const double lp = ev.loss(work);
        t[i] -= 2 * h;
        work.assign(t);
        const double lm = ev.loss(work);
        fd[i] = (lp - lm) / (2 * h);
    }
    const double scale = std::max(1e-3 * fd.cwiseAbs().maxCoeff(), 1e-12);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < theta.size(); ++i) worst = std::max(worst, rel_err(g[i], fd[i], scale));
    return worst;
}

SuiteReport gradients_suite() {
    SuiteReport rep;
    rep.suite = "gradients";
    std::mt19937_64 rng(2024);
    struct NetCase {
        const char* name;
        Architecture arch;
        int dim;
        std::vector<int> widths;
    };
    const NetCase nets[] = {{"net two-layer (x,y)", Architecture::TwoLayer, 2, {20}},
                            {"net two-layer (x,y,t)", Architecture::TwoLayer, 3, {8}},
                            {"net deep (x,y)", Architecture::Deep, 2, {6, 5, 4}},
                            {"net deep (x,y,t)", Architecture::Deep, 3, {5, 4}}};
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (const auto& nc : nets) {
        double worst = 0.0;
        for (int draw = 0; draw < 25; ++draw) {
            const NetworkParams p = random_params(rng, nc.arch, nc.dim, nc.widths);
            const Point x{u(rng), u(rng), 0.5 + 0.5 * u(rng)};
            worst = std::max(worst, network_fd_error(p, x, nc.dim));
        }
        rep.checks.push_back(below(nc.name, worst, 1e-6, "input derivatives and parameter gradients vs central differences, h=1e-4"));
    }
    for (const auto& lc : loss_cases()) {
        for (const bool split : {false, true}) {
            if (split && (lc.kind == AnsatzKind::Baseline || !lc.problem.domain.is_polar())) continue;
            TrainConfig cfg;
            cfg.p = 2;
            cfg.psi_split = split;
            const SampleGrid grid = lc.problem.is_time() ? uniform_grid(lc.problem.domain, 5, 8, 3, 1.0)
                                                         : uniform_grid(lc.problem.domain, 6, 8);
            const AnsatzSpec spec = make_ansatz_spec(lc.problem, lc.kind);
            const LossEvaluator ev(lc.problem, spec, grid, cfg);
            const bool deep = lc.kind == AnsatzKind::Baseline;
            double worst = 0.0;
            const int draws = deep ? 5 : 20;
            for (int draw = 0; draw < draws; ++draw) {
                const NetworkParams p =
                    deep ? random_params(rng, Architecture::Deep, lc.problem.input_dim(), {6, 5, 4})
                         : random_params(rng, Architecture::TwoLayer, lc.problem.input_dim(), {6});
                worst = std::max(worst, loss_fd_error(ev, p, 1e-5));
            }
            rep.checks.push_back(below("loss p=2 " + lc.name + (split ? " psi-split" : ""), worst, 1e-5,
                                       std::to_string(draws) + " random parameter draws vs central differences, h=1e-5"));
        }
    }
    {
        // p = 1 away from kinks: f shifted so that every residual keeps its sign.
        const auto cases = loss_cases();
        ProblemSpec pb = cases[1].problem;
        pb.forcing = [](double, double, double) { return 50.0; };
        TrainConfig cfg;
        cfg.p = 1;
        const SampleGrid grid = uniform_grid(pb.domain, 6, 8);
        const LossEvaluator ev(pb, make_ansatz_spec(pb, AnsatzKind::SingularLayer), grid, cfg);
        double worst = 0.0;
        for (int draw = 0; draw < 10; ++draw) {
            NetworkParams p = init_params(rng(), Architecture::TwoLayer, 2, {6});
            worst = std::max(worst, loss_fd_error(ev, p, 1e-5));
        }
        rep.checks.push_back(below("loss p=1 circle (no kinks)", worst, 1e-4, "10 draws, residuals of one sign"));
    }
    return rep;
}

// ---------------------------------------------------- residual equivalence

struct EquivalenceSet {
    std::string name;
    ProblemSpec problem;
    int half;  // 0 upper, 1 lower, -1 channel
};

std::vector<EquivalenceSet> equivalence_sets() {
    std::vector<EquivalenceSet> out;
    auto make = [](DomainSpec d, Variant v) {
        ProblemSpec p;
        p.domain = d;
        p.variant = v;
        p.forcing = [](double x, double y, double t) { return 1.0 + 0.3 * x - 0.2 * y + 0.1 * t; };
        return p;
    };
    out.push_back({"channel", make(DomainSpec::channel(), Variant::LinearSteady), -1});
    const std::pair<const char*, ProblemSpec> polar[] = {
        {"circle", make(DomainSpec::circle(), Variant::LinearSteady)},
        {"circle-time", make(DomainSpec::circle(), Variant::TimeDependent)},
        {"circle-cubic", make(DomainSpec::circle(), Variant::NonlinearCubic)},
        {"ellipse 4:1", make(DomainSpec::ellipse(4, 1), Variant::LinearSteady)},
        {"ellipse 1:4", make(DomainSpec::ellipse(1, 4), Variant::LinearSteady)},
    };
    for (const auto& [name, pb] : polar) {
        out.push_back({std::string(name) + " upper", pb, 0});
        out.push_back({std::string(name) + " lower", pb, 1});
    }
    return out;
}

SuiteReport residual_equivalence_suite(int samples) {
    SuiteReport rep;
    rep.suite = "residual-equivalence";
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto set : equivalence_sets()) {
        double worst = 0.0;
        std::map<std::string, double> verbatim;  // per-term max discrepancy
        double verbatim_total = 0.0;
        for (int k = 0; k < samples; ++k) {
            ProblemSpec pb = set.problem;
            pb.epsilon = std::pow(10.0, -4.0 + 3.0 * u(rng));
            const NetworkParams params = random_params(rng, Architecture::TwoLayer, pb.input_dim(), {6});
            Point p{};
            if (set.half < 0) {
                p = {0.001 + 0.998 * u(rng), 0.001 + 0.998 * u(rng), 0.0};
                if (u(rng) < 0.5) p[1] = pb.epsilon * 10.0 * u(rng) + 1e-9;
            } else {
                const double R = pb.domain.R;
                const double tau = kPi * (set.half + 0.001 + 0.998 * u(rng));
                double eta = (0.001 + 0.989 * u(rng)) * R;
                if (u(rng) < 0.5) eta = std::min(0.99 * R, pb.epsilon * 10.0 * u(rng) / std::max(std::abs(std::sin(tau)), 0.05) + 1e-9);
                p = {eta, tau, pb.is_time() ? u(rng) : 0.0};
            }
            const AnsatzSpec spec = make_ansatz_spec(pb, AnsatzKind::SingularLayer);
            const double direct = apply_operator(pb, params, spec, p);
            const ExpandedResidual corr = expanded_residual(pb, params, p, ExpansionReading::Corrected);
            double scale = 0.0;
            for (const auto& t : corr.terms) scale += std::abs(t.value);
            // Relative to the residual, floored at 1e-6 of the summed term magnitudes
            // (below that level the difference is pure cancellation round-off).
            worst = std::max(worst, rel_err(corr.total, direct, std::max(1e-6 * scale, 1e-300)));
            if (set.half >= 0) {
                const ExpandedResidual verb = expanded_residual(pb, params, p, ExpansionReading::Verbatim);
                for (const auto& t : corr.terms) {
                    double vt = 0.0;
                    for (const auto& w : verb.terms)
                        if (w.name == t.name) vt = w.value;
                    auto& slot = verbatim[t.name];
                    slot = std::max(slot, std::abs(vt - t.value) / std::max(scale, 1e-300));
                }
                verbatim_total = std::max(verbatim_total, std::abs(verb.total - direct) / std::max(scale, 1e-300));
            }
        }
        std::ostringstream detail;
        detail << samples << " samples, eps in [1e-4, 1e-1]";
        if (!verbatim.empty()) {
            detail << "; verbatim reading: max |total - direct|/sum|terms| = " << verbatim_total
                   << ", terms differing:";
            bool any = false;
            for (const auto& [name, v] : verbatim) {
                if (v > 1e-8) {
                    detail << ' ' << name << '(' << v << ')';
                    any = true;
                }
            }
            if (!any) detail << " none";
        }
        rep.checks.push_back(below("expansion vs direct operator: " + set.name, worst, 1e-8, detail.str()));
    }
    return rep;
}

// ----------------------------------------------------- boundary exactness

SuiteReport boundary_suite() {
    SuiteReport rep;
    rep.suite = "boundary-exactness";
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const DomainSpec domains[] = {DomainSpec::channel(), DomainSpec::circle(), DomainSpec::ellipse(4, 1),
                                  DomainSpec::ellipse(1, 4)};
    for (const auto& d : domains) {
        for (const AnsatzKind kind : {AnsatzKind::SingularLayer, AnsatzKind::Baseline}) {
            for (const bool time : {false, true}) {
                if (time && d.kind != DomainKind::Circle) continue;
                double worst = 0.0;
                double est_ratio = 0.0;
                for (const double eps : {1e-2, 1e-6}) {
                    AnsatzSpec spec;
                    spec.domain = d;
                    spec.kind = kind;
                    spec.epsilon = eps;
                    spec.time_mask = time;
                    const int dim = time ? 3 : 2;
                    for (int k = 0; k < 200; ++k) {
                        const NetworkParams params =
                            kind == AnsatzKind::Baseline ? random_params(rng, Architecture::Deep, dim, {5, 4})
                                                         : random_params(rng, Architecture::TwoLayer, dim, {6});
                        const double t = time ? u(rng) : 0.0;
                        std::vector<Point> pts;
                        if (d.is_polar()) {
                            pts.push_back({0.0, 2 * kPi * u(rng), t});
                            pts.push_back({0.0, kPi * (1 + u(rng)), t});
                        } else {
                            pts = {{0.0, u(rng), 0.0}, {1.0, u(rng), 0.0}, {u(rng), 0.0, 0.0}};
                        }
                        if (time) pts.push_back({0.99 * d.R * u(rng), 2 * kPi * u(rng), 0.0});
                        for (const auto& p : pts) worst = std::max(worst, std::abs(assemble_ansatz(spec, params, p).v));
                        if (!d.is_polar()) {
                            // y = 1: the corrector leaves x(x-1) T(x) e^{-1/eps}.
                            const double x = u(rng);
                            const double v = std::abs(assemble_ansatz(spec, params, {x, 1.0, 0.0}).v);
                            if (kind == AnsatzKind::Baseline) {
                                worst = std::max(worst, v);
                            } else {
                                const Point in{x, 0.0, 0.0};
                                const double T = eval_network(params, std::span<const double>(in.data(), 2)).value;
                                const double bound = std::abs(x * (x - 1.0) * T) * std::exp(-1.0 / eps);
                                est_ratio = std::max(est_ratio, v - bound);
                            }
                        }
                    }
                }
                std::string name = "ansatz " + d.name() + (kind == AnsatzKind::Baseline ? " baseline" : " singular-layer") +
                                   (time ? " (time, incl. t=0)" : "");
                rep.checks.push_back(below(name, worst, 1e-14, "max |v| on the zero-data boundary"));
                if (!d.is_polar() && kind == AnsatzKind::SingularLayer)
                    rep.checks.push_back(below("channel y=1 e.s.t. bound", est_ratio, 1e-14,
                                               "max(|v| - |x(x-1) T| e^{-1/eps}) at y = 1"));
            }
        }
    }
    return rep;
}

// ------------------------------------------------------- lemma / mass / compat

SuiteReport lemma_suite() {
    SuiteReport rep;
    rep.suite = "lemma-scaling";
    const DomainSpec d = DomainSpec::circle();
    const ForcingFn f = [](double x, double, double) { return std::pow(1 - x * x, 2); };
    const auto amp = limit_trace_amplitude(d, f);
    const std::vector<double> eps{1e-2, 1e-3, 1e-4, 1e-5};
    struct Case {
        const char* name;
        int s, m;
        double expected;
    };
    for (const Case c : {Case{"d phi/d tau, L2 (slope +1/2)", 0, 1, 0.5}, Case{"d phi/d eta, L2 (slope -1/2)", 1, 0, -0.5}}) {
        const LemmaScaling a = lemma_norm_scaling(d, eps, 0, 0, c.s, c.m, 2.0, amp, 1);
        const LemmaScaling b = lemma_norm_scaling(d, eps, 0, 0, c.s, c.m, 2.0, amp, 2);
        std::ostringstream os;
        os << "slope " << a.slope << ", fit residual " << a.fit_residual << ", norms";
        for (double n : a.norms) os << ' ' << n;
        rep.checks.push_back(below(std::string(c.name), std::abs(a.slope - c.expected), 0.1, os.str()));
        rep.checks.push_back(below(std::string(c.name) + " grid-doubling stability", std::abs(a.slope - b.slope), 0.02,
                                   "slope change under doubled quadrature resolution"));
    }
    const LemmaScaling z = lemma_norm_scaling(d, eps, 0, 0, 0, 1, 2.0,
                                              [](double) { return std::array<double, 3>{0.0, 0.0, 0.0}; });
    double zmax = 0.0;
    for (double n : z.norms) zmax = std::max(zmax, n);
    CheckResult zr = below("zero trace gives zero norms, fit skipped", zmax, 0.0);
    zr.passed = zr.passed && !z.fitted;
    rep.checks.push_back(zr);
    return rep;
}

SuiteReport l1_mass_suite() {
    SuiteReport rep;
    rep.suite = "l1-mass";
    const DomainSpec d = DomainSpec::circle();
    const std::vector<double> eps{1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
    const ExponentialMass m1 = scaled_exponential_l1_mass(d, eps);
    std::ostringstream os;
    os << "values";
    for (double v : m1.values) os << ' ' << v;
    rep.checks.push_back(below("(1/eps) exp mass within factor 2 over eps 1e-3..1e-8", m1.ratio(), 2.0, os.str()));
    const ExponentialMass m2 = scaled_exponential_l1_mass(d, {1e-3, 1e-5, 1e-8}, 2.0);
    const ExponentialMass m1s = scaled_exponential_l1_mass(d, {1e-3, 1e-5, 1e-8}, 1.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < m2.values.size(); ++i) worst = std::max(worst, std::abs(m2.values[i] / m1s.values[i] - 0.5));
    rep.checks.push_back(below("doubled coefficient roughly halves the mass", worst, 0.1, "max |ratio - 1/2|"));
    rep.checks.push_back(below("upper half carries no mass", scaled_exponential_l1_mass(d, eps, 1.0, true).max, 0.0));
    const SampleGrid g = uniform_grid(d, 50, 50);
    double gmax = 0.0;
    std::ostringstream gs;
    gs << "grid averages";
    for (double e : eps) {
        const double a = grid_exponential_average(g, e);
        gmax = std::max(gmax, a);
        gs << ' ' << a;
    }
    rep.checks.push_back(below("50x50 grid average bounded (max over eps / value at 1e-3)",
                               gmax / grid_exponential_average(g, 1e-3), 2.0, gs.str()));
    return rep;
}

SuiteReport compatibility_suite() {
    SuiteReport rep;
    rep.suite = "compatibility";
    auto add = [&](const std::string& name, const ForcingFn& f, const DomainSpec& d, bool expect) {
        const CompatibilityReport r = compatibility_check(f, d);
        double worst = 0.0;
        for (const auto& p : r.points)
            worst = std::max({worst, std::abs(p.f), std::abs(p.fx), std::abs(p.fy), std::abs(p.fyy)});
        CheckResult c;
        c.name = name;
        c.value = worst;
        c.threshold = r.threshold;
        c.passed = r.compatible == expect;
        c.detail = std::string("classified ") + (r.compatible ? "compatible" : "incompatible");
        rep.checks.push_back(c);
    };
    add("circle f=(1-x^2)^2 compatible", [](double x, double, double) { return std::pow(1 - x * x, 2); },
        DomainSpec::circle(), true);
    add("circle f=1 incompatible", [](double, double, double) { return 1.0; }, DomainSpec::circle(), false);
    add("ellipse 4:1 forcing compatible", [](double x, double, double) { return std::pow(1 - x * x / 16, 2); },
        DomainSpec::ellipse(4, 1), true);
    add("ellipse 1:4 forcing compatible", [](double x, double, double) { return std::pow(1 - x * x, 2) / 4; },
        DomainSpec::ellipse(1, 4), true);
    return rep;
}

}  // namespace

bool SuiteReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::vector<std::string> suite_names() {
    return {"gradients", "residual-equivalence", "boundary-exactness", "lemma-scaling", "l1-mass", "compatibility"};
}

SuiteReport run_suite(const std::string& name) {
    if (name == "gradients") return gradients_suite();
    if (name == "residual-equivalence") return residual_equivalence_suite(10000);
    if (name == "boundary-exactness") return boundary_suite();
    if (name == "lemma-scaling") return lemma_suite();
    if (name == "l1-mass") return l1_mass_suite();
    if (name == "compatibility") return compatibility_suite();
    throw ConfigError("unknown check suite '" + name + "'");
}

nlohmann::json to_json(const SuiteReport& r) {
    nlohmann::json j;
    j["suite"] = r.suite;
    j["passed"] = r.passed();
    j["checks"] = nlohmann::json::array();
    for (const auto& c : r.checks) {
        j["checks"].push_back({{"name", c.name},
                               {"passed", c.passed},
                               {"value", std::isfinite(c.value) ? nlohmann::json(c.value) : nlohmann::json(nullptr)},
                               {"threshold", c.threshold},
                               {"detail", c.detail}});
    }
    return j;
}

}  // namespace slpinn
