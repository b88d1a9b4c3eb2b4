// slpinn: command-line runner for single trainings, epsilon sweeps, the
// error-table matrix, self-check suites and configuration dumps.
//
// Exit codes: 0 success, 1 unexpected error, 2 configuration error,
// 3 numerical abort, 4 failed check.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "slpinn/analysis.hpp"
#include "slpinn/checks.hpp"
#include "slpinn/config.hpp"
#include "slpinn/error.hpp"

namespace fs = std::filesystem;
using namespace slpinn;

namespace {

constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitCheck = 4;

std::vector<double> parse_epsilons(const std::vector<std::string>& items) {
    std::vector<double> out;
    for (const auto& s : items) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || !(v > 0.0)) throw ConfigError("--epsilons: invalid value '" + s + "'");
        out.push_back(v);
    }
    return out;
}

void print_row(const ErrorRow& r) {
    std::cerr << r.problem << "  eps=" << r.epsilon << "  " << method_name(r.method) << "  rel_l2=" << r.rel_l2
              << "  (" << r.runtime_s << " s)" << (r.status == "ok" ? "" : "  " + r.status) << '\n';
}

void write_report(const ErrorReport& report, const fs::path& dir, const std::string& stem) {
    std::ostringstream csv;
    report.write_csv(csv);
    atomic_write(dir / (stem + ".csv"), csv.str());
    const std::string table = report.render_table();
    atomic_write(dir / (stem + ".txt"), table);
    std::cout << table;
}

/// Prediction and reference on every grid point; in_metric marks the rows
/// entering the relative error (the t = T slice for time problems).
struct FullField {
    std::vector<double> predicted;
    std::vector<double> reference;
    std::vector<bool> in_metric;
    double rel_l2 = 0.0;
};

FullField full_field(const ProblemCase& pc, const AnsatzSpec& spec, const NetworkParams& params,
                     const SampleGrid& grid) {
    const FieldEvaluation metric = evaluate_field(pc, spec, params, grid);
    FullField f;
    f.predicted.resize(grid.size());
    f.reference.resize(grid.size());
    f.in_metric.assign(grid.size(), false);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        f.predicted[i] = assemble_ansatz(spec, params, grid.points[i]).v;
        f.reference[i] = pc.reference(grid.points[i]);
    }
    for (std::size_t i : metric.indices) f.in_metric[i] = true;
    f.rel_l2 = relative_l2_error(metric.predicted, metric.reference);
    return f;
}

int cmd_run(const std::string& path, bool dry_run) {
    const ExperimentConfig cfg = load_config(path);
    const ProblemCase pc = resolve_problem(cfg);
    const TrainConfig tc = resolve_train(cfg, pc.problem);
    if (dry_run) {
        std::cout << dump_config(cfg);
        return 0;
    }
    if (!pc.reference) throw ConfigError("problem: no reference field is available for '" + pc.id + "'");

    const bool baseline = cfg.method == Method::PinnL2;
    const AnsatzSpec spec = make_ansatz_spec(pc.problem, baseline ? AnsatzKind::Baseline : AnsatzKind::SingularLayer);
    const int dim = pc.problem.input_dim();
    const NetworkParams p0 = baseline ? init_params(tc.seed, Architecture::Deep, dim, cfg.baseline_widths)
                                      : init_params(tc.seed, Architecture::TwoLayer, dim, {cfg.width});
    const SampleGrid grid = training_grid(pc.problem, tc);
    std::cerr << "training " << pc.id << " (" << method_name(cfg.method) << ", eps=" << pc.problem.epsilon << ", "
              << grid.size() << " points, " << tc.iterations << " iterations)\n";
    const TrainReport report = train(pc.problem, spec, p0, grid, tc);

    const fs::path out = cfg.output_dir;
    atomic_write(out / "train_report.json", to_json(report).dump(2) + "\n");

    nlohmann::json summary;
    summary["problem"] = pc.id;
    summary["method"] = method_name(cfg.method);
    summary["epsilon"] = pc.problem.epsilon;
    summary["reference"] = pc.reference_name;
    summary["runtime_s"] = report.wall_time_s;
    summary["seed"] = report.seed;
    summary["iterations_run"] = report.iterations_run;
    summary["final_loss"] = report.final_loss();
    summary["aborted"] = report.aborted;
    summary["diagnostic"] = report.diagnostic;
    summary["config"] = dump_config(cfg);
    if (report.aborted) {
        summary["rel_l2"] = nullptr;
        atomic_write(out / "summary.json", summary.dump(2) + "\n");
        std::cerr << "numerical abort: " << report.diagnostic << '\n';
        return kExitNumerical;
    }

    const FullField field = full_field(pc, spec, report.params, grid);
    atomic_write(out / "field.csv", field_csv(grid, field.predicted, field.reference, field.in_metric));
    if (cfg.fine_grid) {
        const SampleGrid fine =
            uniform_grid(pc.problem.domain, 200, 200, pc.problem.is_time() ? 2 : 0, pc.problem.T);
        const FullField ff = full_field(pc, spec, report.params, fine);
        atomic_write(out / "field_fine.csv", field_csv(fine, ff.predicted, ff.reference, ff.in_metric));
    }

    summary["rel_l2"] = field.rel_l2;
    atomic_write(out / "summary.json", summary.dump(2) + "\n");

    std::cout << "rel_l2 = " << field.rel_l2 << "  (" << report.wall_time_s << " s, final loss "
              << report.final_loss() << ")\n";
    return 0;
}

int cmd_sweep(const std::string& path) {
    const ExperimentConfig cfg = load_config(path);
    std::vector<std::string> problems = cfg.sweep_problems;
    if (problems.empty()) problems = table1_problem_ids();
    for (const auto& id : problems) make_problem(id, cfg.epsilon);  // reject unknown ids before training
    const ErrorReport report =
        epsilon_sweep(problems, cfg.sweep_epsilons, cfg.sweep_methods, resolve_sweep(cfg), print_row);
    write_report(report, cfg.output_dir, "sweep");
    return 0;
}

struct Table1Options {
    std::string out = "table1_out";
    std::string config;
    int iterations = -1;
    double learning_rate = -1.0;
    long long seed = -1;
    std::vector<std::string> problems;
    std::vector<std::string> epsilons;
    std::vector<std::string> methods;
};

int cmd_table1(const Table1Options& o) {
    SweepConfig sc = o.config.empty() ? SweepConfig{} : resolve_sweep(load_config(o.config));
    if (o.iterations >= 0) sc.train.iterations = sc.time_train.iterations = o.iterations;
    if (o.learning_rate > 0.0) sc.train.learning_rate = sc.time_train.learning_rate = o.learning_rate;
    if (o.seed >= 0) sc.train.seed = sc.time_train.seed = static_cast<std::uint64_t>(o.seed);
    sc.train.validate();

    const std::vector<std::string> problems = o.problems.empty() ? table1_problem_ids() : o.problems;
    for (const auto& id : problems) make_problem(id, 1e-6);
    const std::vector<double> eps = o.epsilons.empty() ? std::vector<double>{1e-4, 1e-6, 1e-8} : parse_epsilons(o.epsilons);
    std::vector<Method> methods{Method::PinnL2, Method::SLPinnL2, Method::SLPinnL1};
    if (!o.methods.empty()) {
        methods.clear();
        for (const auto& m : o.methods) methods.push_back(parse_method(m));
    }
    const ErrorReport report = epsilon_sweep(problems, eps, methods, sc, print_row);
    write_report(report, o.out, "table1");
    return 0;
}

int cmd_check(const std::string& suite) {
    std::vector<std::string> suites{suite};
    if (suite == "all") suites = suite_names();
    bool ok = true;
    nlohmann::json out = nlohmann::json::array();
    for (const auto& s : suites) {
        const SuiteReport r = run_suite(s);
        ok = ok && r.passed();
        out.push_back(to_json(r));
    }
    std::cout << (suites.size() == 1 ? out[0] : out).dump(2) << '\n';
    return ok ? 0 : kExitCheck;
}

int cmd_config_dump(const std::string& path) {
    const ExperimentConfig cfg = path.empty() ? ExperimentConfig{} : load_config(path);
    std::cout << dump_config(cfg);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Singular-layer PINN solver for convection-dominated convection-diffusion problems"};
    app.require_subcommand(1);

    std::string run_cfg;
    bool dry_run = false;
    auto* run = app.add_subcommand("run", "Train one configuration and export its report and field");
    run->add_option("config", run_cfg, "Configuration file")->required();
    run->add_flag("--dry-run", dry_run, "Print the resolved configuration and exit without writing");

    Table1Options t1;
    auto* table1 = app.add_subcommand("table1", "Run the problem x epsilon x method error matrix");
    table1->add_option("--out", t1.out, "Output directory")->capture_default_str();
    table1->add_option("--config", t1.config, "Configuration file supplying training settings");
    table1->add_option("--iterations", t1.iterations, "Iteration budget per row");
    table1->add_option("--lr", t1.learning_rate, "Learning rate");
    table1->add_option("--seed", t1.seed, "Initialization seed");
    table1->add_option("--problems", t1.problems, "Problem ids")->delimiter(',');
    table1->add_option("--epsilons", t1.epsilons, "Epsilon values")->delimiter(',');
    table1->add_option("--methods", t1.methods, "Methods (PINN-L2, SL-PINN-L2, SL-PINN-L1)")->delimiter(',');

    std::string sweep_cfg;
    auto* sweep = app.add_subcommand("sweep", "Epsilon sweep over the [sweep] section of a configuration");
    sweep->add_option("config", sweep_cfg, "Configuration file")->required();

    std::string suite;
    auto* check = app.add_subcommand("check", "Run a self-check suite and print JSON");
    std::ostringstream suites_help;
    for (const auto& s : suite_names()) suites_help << s << ", ";
    check->add_option("suite", suite, "Suite: " + suites_help.str() + "or all")->required();

    std::string dump_cfg;
    auto* config = app.add_subcommand("config", "Configuration utilities");
    auto* dump = config->add_subcommand("dump", "Print every configuration key with its value");
    dump->add_option("config", dump_cfg, "Configuration file (defaults when omitted)");
    config->require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run) return cmd_run(run_cfg, dry_run);
        if (*table1) return cmd_table1(t1);
        if (*sweep) return cmd_sweep(sweep_cfg);
        if (*check) return cmd_check(suite);
        if (*dump) return cmd_config_dump(dump_cfg);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
