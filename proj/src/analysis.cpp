#include "slpinn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "slpinn/correctors.hpp"
#include "slpinn/error.hpp"
#include "slpinn/reference.hpp"

namespace slpinn {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxCells = 400;
using Gauss = boost::math::quadrature::gauss<double, 8>;

/// Breakpoints on [lo, hi]: uniform panels merged with geometric grading of
/// ratio 2 toward the requested ends, starting at width h0.
std::vector<double> graded_breaks(double lo, double hi, int uniform, double h0, bool grade_lo, bool grade_hi) {
    std::vector<double> b;
    for (int j = 0; j <= uniform; ++j) b.push_back(lo + (hi - lo) * j / uniform);
    const double mid = 0.5 * (lo + hi);
    if (h0 > 0.0) {
        int count = 0;
        for (double w = h0; lo + w < mid; w *= 2.0) {
            if (grade_lo) b.push_back(lo + w);
            if (grade_hi) b.push_back(hi - w);
            if (++count > kMaxCells) {
                std::ostringstream os;
                os << "layer-adapted subdivision needs more than " << kMaxCells << " cells (smallest width " << h0
                   << ")";
                throw DomainError(os.str());
            }
        }
    }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

/// Split every panel into `refinement` equal pieces.
std::vector<double> refine(const std::vector<double>& b, int refinement) {
    if (refinement <= 1) return b;
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < b.size(); ++i)
        for (int k = 0; k < refinement; ++k) out.push_back(b[i] + (b[i + 1] - b[i]) * k / refinement);
    out.push_back(b.back());
    return out;
}

template <class F>
double integrate_panels(const std::vector<double>& b, F&& f) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < b.size(); ++i) total += Gauss::integrate(f, b[i], b[i + 1]);
    return total;
}

double pick_derivative(const Jet<double>& j, int s, int m) {
    if (s == 0 && m == 0) return j.v;
    if (s == 1 && m == 0) return j.g[0];
    if (s == 0 && m == 1) return j.g[1];
    if (s == 2 && m == 0) return j.hess(0, 0);
    if (s == 1 && m == 1) return j.hess(0, 1);
    return j.hess(1, 1);
}

std::string format_sci(double v) {
    if (!std::isfinite(v)) return "nan";
    std::ostringstream os;
    os << std::scientific << std::setprecision(2) << v;
    return os.str();
}

std::string problem_label(const std::string& id) {
    try {
        return make_problem(id, 1.0).label;
    } catch (const Error&) {
        return id;
    }
}

int problem_rank(const std::string& id) {
    const auto ids = problem_ids();
    const auto it = std::find(ids.begin(), ids.end(), id);
    return static_cast<int>(it - ids.begin());
}

}  // namespace

double relative_l2_error(std::span<const double> pred, std::span<const double> ref, std::span<const double> w) {
    if (pred.size() != ref.size()) throw DimensionError("predicted and reference fields differ in length");
    if (!w.empty() && w.size() != ref.size()) throw DimensionError("weights differ in length from the fields");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double wi = w.empty() ? 1.0 : w[i];
        const double d = pred[i] - ref[i];
        num += wi * d * d;
        den += wi * ref[i] * ref[i];
    }
    if (!(den > 0.0)) throw DomainError("the reference field has zero norm");
    return std::sqrt(num) / std::sqrt(den);
}

FieldEvaluation evaluate_field(const ProblemCase& pc, const AnsatzSpec& spec, const NetworkParams& params,
                               const SampleGrid& grid) {
    if (!pc.reference) throw NotApplicable("problem '" + pc.id + "' has no designated reference");
    FieldEvaluation out;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Point& p = grid.points[i];
        if (grid.time && std::abs(p[2] - grid.T) > 1e-12 * std::max(1.0, grid.T)) continue;
        out.indices.push_back(i);
        out.predicted.push_back(assemble_ansatz(spec, params, p).v);
        out.reference.push_back(pc.reference(p));
    }
    return out;
}

TraceAmplitude limit_trace_amplitude(const DomainSpec& domain, const ForcingFn& f) {
    if (!domain.is_polar()) throw NotApplicable("trace amplitudes are defined for circle and ellipse");
    return [domain, f](double tau) {
        auto a = [&](double t) {
            t = std::fmod(t, 2.0 * kPi);
            if (t < 0.0) t += 2.0 * kPi;
            const auto xy = to_cartesian(domain, Point{0.0, t, 0.0});
            const double top = upper_ordinate(domain, std::clamp(xy[0], -domain.A, domain.A));
            return limit_solution(domain, f, std::clamp(xy[0], -domain.A, domain.A), std::clamp(xy[1], -top, top));
        };
        const double h = 1e-3;
        const double a0 = a(tau);
        const double ap = a(tau + h), am = a(tau - h), ap2 = a(tau + 2 * h), am2 = a(tau - 2 * h);
        const double d1 = (-ap2 + 8 * ap - 8 * am + am2) / (12 * h);
        const double d2 = (-ap2 + 16 * ap - 30 * a0 + 16 * am - am2) / (12 * h * h);
        return std::array<double, 3>{a0, d1, d2};
    };
}

LemmaScaling lemma_norm_scaling(const DomainSpec& domain, const std::vector<double>& epsilons, int l, int n, int s,
                                int m, double p_norm, const TraceAmplitude& amplitude, int refinement) {
    if (!domain.is_polar()) throw NotApplicable("corrector norms are defined for circle and ellipse");
    if (epsilons.size() < 3) throw DomainError("at least three epsilon values are required");
    const auto [lo, hi] = std::minmax_element(epsilons.begin(), epsilons.end());
    if (!(*lo > 0.0) || *hi / *lo < 1e3 * (1.0 - 1e-9)) throw DomainError("epsilon values must span three decades");
    if (s < 0 || m < 0 || s + m > 2) throw DomainError("derivative orders need s + m <= 2");
    if (!(p_norm >= 1.0)) throw DomainError("p_norm must be at least 1");
    if (refinement < 1) throw DomainError("refinement must be positive");

    LemmaScaling out;
    out.epsilons = epsilons;
    for (const double eps : epsilons) {
        const auto eta_b = refine(graded_breaks(0.0, domain.R, 16, eps / 10.0, true, false), refinement);
        const auto tau_b = refine(graded_breaks(kPi, 2.0 * kPi, 64, eps / 10.0, true, true), refinement);
        const double total = integrate_panels(tau_b, [&](double tau) {
            const auto a = amplitude(tau);
            if (a[0] == 0.0 && a[1] == 0.0 && a[2] == 0.0) return 0.0;
            Jet<double> A(-a[0]);
            A.g[1] = -a[1];
            A.hess(1, 1) = -a[2];
            const double weight_tau = std::pow(std::abs(std::sin(tau)), -static_cast<double>(l));
            return integrate_panels(eta_b, [&](double eta) {
                const Jet<double> phi = A * corrector_factor(domain, eps, Point{eta, tau, 0.0});
                const double w = weight_tau * std::pow(eta / eps, static_cast<double>(n));
                return std::pow(std::abs(w * pick_derivative(phi, s, m)), p_norm);
            });
        });
        out.norms.push_back(std::pow(total, 1.0 / p_norm));
    }
    const bool all_positive = std::all_of(out.norms.begin(), out.norms.end(), [](double v) { return v > 0.0; });
    if (!all_positive) return out;  // zero trace: nothing to fit
    const std::size_t k = epsilons.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double x = std::log(epsilons[i]);
        const double y = std::log(out.norms[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double kd = static_cast<double>(k);
    out.slope = (kd * sxy - sx * sy) / (kd * sxx - sx * sx);
    out.intercept = (sy - out.slope * sx) / kd;
    double rss = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double r = std::log(out.norms[i]) - (out.intercept + out.slope * std::log(epsilons[i]));
        rss += r * r;
    }
    out.fit_residual = std::sqrt(rss / kd);
    out.fitted = true;
    return out;
}

ExponentialMass scaled_exponential_l1_mass(const DomainSpec& domain, const std::vector<double>& epsilons,
                                           double coefficient, bool upper_half) {
    if (!domain.is_polar()) throw NotApplicable("the exponential mass is defined for circle and ellipse");
    ExponentialMass out;
    out.epsilons = epsilons;
    const double k = coefficient * domain.corrector_rate();
    for (const double eps : epsilons) {
        if (!(eps > 0.0)) throw DomainError("epsilon must be positive");
        const double t0 = upper_half ? 0.0 : kPi;
        const auto eta_b = graded_breaks(0.0, domain.R, 16, eps / 10.0, true, false);
        const auto tau_b = graded_breaks(t0, t0 + kPi, 64, eps / 10.0, true, true);
        const double v = integrate_panels(tau_b, [&](double tau) {
            if (!in_lower_half(tau)) return 0.0;  // the layer indicator vanishes on the upper half
            const double st = std::sin(tau);
            return integrate_panels(eta_b, [&](double eta) {
                const double e = k * st * eta / eps;
                return e < kUnderflowExponent ? 0.0 : std::exp(e) / eps;
            });
        });
        out.values.push_back(v);
    }
    if (!out.values.empty()) {
        out.max = *std::max_element(out.values.begin(), out.values.end());
        out.min = *std::min_element(out.values.begin(), out.values.end());
    }
    return out;
}

double grid_exponential_average(const SampleGrid& grid, double eps) {
    if (!grid.domain.is_polar()) throw NotApplicable("the exponential average is defined for circle and ellipse");
    const double k = grid.domain.corrector_rate();
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& p : grid.points) {
        if (!in_lower_half(p[1])) continue;
        const double e = k * std::sin(p[1]) * p[0] / eps;
        total += e < kUnderflowExponent ? 0.0 : std::exp(e) / eps;
        ++count;
    }
    return count ? total / static_cast<double>(count) : 0.0;
}

std::string method_name(Method m) {
    switch (m) {
        case Method::SLPinnL1: return "SL-PINN-L1";
        case Method::SLPinnL2: return "SL-PINN-L2";
        case Method::PinnL2: return "PINN-L2";
    }
    return "?";
}

Method parse_method(const std::string& name) {
    if (name == "SL-PINN-L1") return Method::SLPinnL1;
    if (name == "SL-PINN-L2") return Method::SLPinnL2;
    if (name == "PINN-L2") return Method::PinnL2;
    throw ConfigError("unknown method '" + name + "' (expected SL-PINN-L1, SL-PINN-L2 or PINN-L2)");
}

void ErrorReport::sort() {
    std::stable_sort(rows.begin(), rows.end(), [](const ErrorRow& a, const ErrorRow& b) {
        const int ra = problem_rank(a.problem), rb = problem_rank(b.problem);
        if (ra != rb) return ra < rb;
        if (a.problem != b.problem) return a.problem < b.problem;
        if (a.epsilon != b.epsilon) return a.epsilon > b.epsilon;
        return static_cast<int>(a.method) < static_cast<int>(b.method);
    });
}

void ErrorReport::write_csv(std::ostream& os) const {
    os << "problem,epsilon,method,rel_l2,runtime_s,seed\n";
    for (const auto& r : rows) {
        os << r.problem << ',' << std::setprecision(17) << r.epsilon << ',' << method_name(r.method) << ',';
        if (std::isfinite(r.rel_l2)) {
            os << r.rel_l2;
        } else {
            os << "nan";
        }
        os << ',' << r.runtime_s << ',' << r.seed << '\n';
    }
}

const ErrorRow* ErrorReport::find(const std::string& problem, double eps, Method m) const {
    for (const auto& r : rows)
        if (r.problem == problem && r.method == m && std::abs(r.epsilon - eps) <= 1e-12 * eps) return &r;
    return nullptr;
}

std::string ErrorReport::render_table() const {
    std::vector<std::string> problems;
    std::set<double, std::greater<>> eps_set;
    for (const auto& r : rows) {
        if (std::find(problems.begin(), problems.end(), r.problem) == problems.end()) problems.push_back(r.problem);
        eps_set.insert(r.epsilon);
    }
    std::stable_sort(problems.begin(), problems.end(),
                     [](const std::string& a, const std::string& b) { return problem_rank(a) < problem_rank(b); });
    const std::pair<Method, const char*> blocks[] = {
        {Method::PinnL2, "Relative L2 error by L2 training (PINN)"},
        {Method::SLPinnL2, "Relative L2 error by L2 training (SL-PINN)"},
        {Method::SLPinnL1, "Relative L2 error by L1 training (SL-PINN)"},
    };
    std::ostringstream os;
    const int col = 24;
    for (const auto& [method, title] : blocks) {
        bool any = false;
        for (const auto& r : rows) any = any || r.method == method;
        if (!any) continue;
        os << title << "\n";
        os << std::left << std::setw(12) << "epsilon";
        for (const auto& p : problems) os << std::setw(col) << problem_label(p);
        os << "\n";
        for (const double eps : eps_set) {
            os << std::setw(12) << format_sci(eps);
            for (const auto& p : problems) {
                const ErrorRow* r = find(p, eps, method);
                os << std::setw(col) << (r ? format_sci(r->rel_l2) : std::string("-"));
            }
            os << "\n";
        }
        os << "\n";
    }
    return os.str();
}

SweepConfig::SweepConfig() {
    time_train = train;
    time_train.n_eta = 20;
    time_train.n_tau = 20;
    time_train.n_t = 6;
}

TrainConfig method_config(const SweepConfig& cfg, const ProblemSpec& problem, Method m) {
    TrainConfig tc = problem.is_time() ? cfg.time_train : cfg.train;
    tc.p = m == Method::SLPinnL1 ? 1 : 2;
    tc.psi_split = m == Method::SLPinnL1 && problem.domain.is_polar();
    return tc;
}

ErrorRow run_case(const std::string& problem, double eps, Method m, const SweepConfig& cfg, TrainReport* report_out) {
    ErrorRow row;
    row.problem = problem;
    row.epsilon = eps;
    row.method = m;
    row.seed = cfg.train.seed;
    try {
        const ProblemCase pc = make_problem(problem, eps, cfg.options);
        const bool baseline = m == Method::PinnL2;
        const AnsatzSpec spec =
            make_ansatz_spec(pc.problem, baseline ? AnsatzKind::Baseline : AnsatzKind::SingularLayer);
        const TrainConfig tc = method_config(cfg, pc.problem, m);
        row.seed = tc.seed;
        const NetworkParams p0 =
            baseline ? init_params(tc.seed, Architecture::Deep, pc.problem.input_dim(), cfg.baseline_widths)
                     : init_params(tc.seed, Architecture::TwoLayer, pc.problem.input_dim(), {cfg.width});
        const SampleGrid grid = training_grid(pc.problem, tc);
        TrainReport rep = train(pc.problem, spec, p0, grid, tc);
        row.runtime_s = rep.wall_time_s;
        const FieldEvaluation field = evaluate_field(pc, spec, rep.params, grid);
        row.rel_l2 = relative_l2_error(field.predicted, field.reference);
        if (rep.aborted) row.status = "aborted: " + rep.diagnostic;
        if (report_out) *report_out = std::move(rep);
    } catch (const std::exception& e) {
        row.rel_l2 = std::numeric_limits<double>::quiet_NaN();
        row.status = std::string("failed: ") + e.what();
    }
    return row;
}

ErrorReport epsilon_sweep(const std::vector<std::string>& problems, const std::vector<double>& epsilons,
                          const std::vector<Method>& methods, const SweepConfig& cfg,
                          const std::function<void(const ErrorRow&)>& progress) {
    ErrorReport report;
    for (const auto& problem : problems) {
        for (const double eps : epsilons) {
            for (const Method m : methods) {
                report.rows.push_back(run_case(problem, eps, m, cfg));
                if (progress) progress(report.rows.back());
            }
        }
    }
    report.sort();
    return report;
}

}  // namespace slpinn
