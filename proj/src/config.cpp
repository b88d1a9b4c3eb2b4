#include "slpinn/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>
#include <unistd.h>

#include "slpinn/error.hpp"
#include "slpinn/expr.hpp"

namespace slpinn {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double d = 0.0;
    try {
        d = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size() || !std::isfinite(d)) throw ConfigError(key + ": expected a number, got '" + v + "'");
    return d;
}

long long to_integer(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    long long i = 0;
    try {
        i = std::stoll(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return i;
}

int to_int(const std::string& key, const std::string& v) {
    const long long i = to_integer(key, v);
    if (i < -2147483647LL || i > 2147483647LL) throw ConfigError(key + ": integer out of range");
    return static_cast<int>(i);
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

template <class T, class F>
std::string join(const std::vector<T>& xs, F&& f) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + f(xs[i]);
    return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"problem.name", [](auto& c, auto&, auto& v) { c.name = v; }},
        {"problem.domain", [](auto& c, auto&, auto& v) { c.domain = v; }},
        {"problem.A", [](auto& c, auto& k, auto& v) { c.A = to_double(k, v); }},
        {"problem.B", [](auto& c, auto& k, auto& v) { c.B = to_double(k, v); }},
        {"problem.variant", [](auto& c, auto&, auto& v) { c.variant = v; }},
        {"problem.forcing", [](auto& c, auto&, auto& v) { c.forcing = v; }},
        {"problem.epsilon", [](auto& c, auto& k, auto& v) { c.epsilon = to_double(k, v); }},
        {"problem.T", [](auto& c, auto& k, auto& v) { c.T = to_double(k, v); }},
        {"problem.amplitude", [](auto& c, auto&, auto& v) { c.amplitude = v; }},
        {"problem.rhs", [](auto& c, auto&, auto& v) { c.rhs = v; }},
        {"method.method", [](auto& c, auto&, auto& v) { c.method = parse_method(v); }},
        {"method.width", [](auto& c, auto& k, auto& v) { c.width = to_int(k, v); }},
        {"method.baseline_widths",
         [](auto& c, auto& k, auto& v) {
             c.baseline_widths.clear();
             for (const auto& w : split_list(v)) c.baseline_widths.push_back(to_int(k, w));
         }},
        {"method.psi_split", [](auto& c, auto&, auto& v) { c.psi_split = v; }},
        {"train.learning_rate", [](auto& c, auto& k, auto& v) { c.train.learning_rate = to_double(k, v); }},
        {"train.iterations", [](auto& c, auto& k, auto& v) { c.train.iterations = to_int(k, v); }},
        {"train.optimizer",
         [](auto& c, auto& k, auto& v) {
             if (v == "adam") {
                 c.train.optimizer = OptimizerKind::Adam;
             } else if (v == "gd") {
                 c.train.optimizer = OptimizerKind::GradientDescent;
             } else {
                 throw ConfigError(k + ": expected adam or gd, got '" + v + "'");
             }
         }},
        {"train.beta1", [](auto& c, auto& k, auto& v) { c.train.beta1 = to_double(k, v); }},
        {"train.beta2", [](auto& c, auto& k, auto& v) { c.train.beta2 = to_double(k, v); }},
        {"train.adam_epsilon", [](auto& c, auto& k, auto& v) { c.train.adam_epsilon = to_double(k, v); }},
        {"train.seed",
         [](auto& c, auto& k, auto& v) {
             const long long s = to_integer(k, v);
             if (s < 0) throw ConfigError(k + ": seed must be non-negative");
             c.train.seed = static_cast<std::uint64_t>(s);
         }},
        {"train.n_eta", [](auto& c, auto& k, auto& v) { c.train.n_eta = to_int(k, v); }},
        {"train.n_tau", [](auto& c, auto& k, auto& v) { c.train.n_tau = to_int(k, v); }},
        {"train.n_t", [](auto& c, auto& k, auto& v) { c.train.n_t = to_int(k, v); }},
        {"train.log_every", [](auto& c, auto& k, auto& v) { c.train.log_every = to_int(k, v); }},
        {"output.dir", [](auto& c, auto&, auto& v) { c.output_dir = v; }},
        {"output.fine_grid", [](auto& c, auto& k, auto& v) { c.fine_grid = to_bool(k, v); }},
        {"sweep.problems", [](auto& c, auto&, auto& v) { c.sweep_problems = split_list(v); }},
        {"sweep.epsilons",
         [](auto& c, auto& k, auto& v) {
             c.sweep_epsilons.clear();
             for (const auto& e : split_list(v)) c.sweep_epsilons.push_back(to_double(k, e));
         }},
        {"sweep.methods",
         [](auto& c, auto&, auto& v) {
             c.sweep_methods.clear();
             for (const auto& m : split_list(v)) c.sweep_methods.push_back(parse_method(m));
         }},
    };
    return table;
}

void validate(const ExperimentConfig& c) {
    if (c.name.empty()) throw ConfigError("problem.name: missing problem name");
    if (!(c.epsilon > 0.0)) throw ConfigError("problem.epsilon: must be positive");
    if (c.width < 1) throw ConfigError("method.width: must be at least 1");
    if (c.baseline_widths.size() < 2) throw ConfigError("method.baseline_widths: need at least two hidden layers");
    for (int w : c.baseline_widths)
        if (w < 1) throw ConfigError("method.baseline_widths: widths must be at least 1");
    if (c.psi_split != "auto" && c.psi_split != "true" && c.psi_split != "false")
        throw ConfigError("method.psi_split: expected auto, true or false");
    if (c.rhs != "HF" && c.rhs != "F") throw ConfigError("problem.rhs: expected HF or F");
    try {
        c.train.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("train: ") + e.what());
    }
    for (double e : c.sweep_epsilons)
        if (!(e > 0.0)) throw ConfigError("sweep.epsilons: values must be positive");
}

}  // namespace

ExperimentConfig::ExperimentConfig() { train.n_t = 6; }

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
    ExperimentConfig cfg;
    std::string section;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto where = source + ":" + std::to_string(lineno) + ": ";
        std::string s = trim(line);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError(where + "malformed section header");
            section = trim(s.substr(1, s.size() - 2));
            if (section != "problem" && section != "method" && section != "train" && section != "output" &&
                section != "sweep")
                throw ConfigError(where + "unknown section [" + section + "]");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
        if (section.empty()) throw ConfigError(where + "key outside of a section");
        const std::string key = section + "." + trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) throw ConfigError(where + "unknown key " + key);
        try {
            it->second(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    validate(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse_config(in, path.string());
}

std::string dump_config(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "[problem]\n"
       << "# registry name (" << join(problem_ids(), [](const std::string& s) { return s; })
       << ") or custom\n"
       << "name = " << c.name << "\n"
       << "# custom problems only: domain (channel, circle, ellipse), A, B, variant (linear, time, cubic), forcing\n"
       << "domain = " << c.domain << "\n"
       << "A = " << fmt(c.A) << "\n"
       << "B = " << fmt(c.B) << "\n"
       << "variant = " << c.variant << "\n"
       << "forcing = " << c.forcing << "\n"
       << "epsilon = " << fmt(c.epsilon) << "\n"
       << "T = " << fmt(c.T) << "\n"
       << "amplitude = " << c.amplitude << "\n"
       << "rhs = " << c.rhs << "\n\n"
       << "[method]\n"
       << "# SL-PINN-L2, SL-PINN-L1 or PINN-L2\n"
       << "method = " << method_name(c.method) << "\n"
       << "width = " << c.width << "\n"
       << "baseline_widths = " << join(c.baseline_widths, [](int w) { return std::to_string(w); }) << "\n"
       << "psi_split = " << c.psi_split << "\n\n"
       << "[train]\n"
       << "learning_rate = " << fmt(c.train.learning_rate) << "\n"
       << "iterations = " << c.train.iterations << "\n"
       << "optimizer = " << (c.train.optimizer == OptimizerKind::Adam ? "adam" : "gd") << "\n"
       << "beta1 = " << fmt(c.train.beta1) << "\n"
       << "beta2 = " << fmt(c.train.beta2) << "\n"
       << "adam_epsilon = " << fmt(c.train.adam_epsilon) << "\n"
       << "seed = " << c.train.seed << "\n"
       << "n_eta = " << c.train.n_eta << "\n"
       << "n_tau = " << c.train.n_tau << "\n"
       << "# time levels, used by time-dependent problems only\n"
       << "n_t = " << c.train.n_t << "\n"
       << "log_every = " << c.train.log_every << "\n\n"
       << "[output]\n"
       << "dir = " << c.output_dir << "\n"
       << "fine_grid = " << (c.fine_grid ? "true" : "false") << "\n\n"
       << "[sweep]\n"
       << "problems = " << join(c.sweep_problems, [](const std::string& s) { return s; }) << "\n"
       << "epsilons = " << join(c.sweep_epsilons, [](double e) { return fmt(e); }) << "\n"
       << "methods = " << join(c.sweep_methods, [](Method m) { return method_name(m); }) << "\n";
    return os.str();
}

ProblemCase resolve_problem(const ExperimentConfig& c) {
    ProblemOptions opt;
    opt.amplitude = c.amplitude;
    opt.rhs = c.rhs == "F" ? RhsConvention::F : RhsConvention::HF;
    opt.T = c.T;
    if (c.name != "custom") {
        const auto ids = problem_ids();
        if (std::find(ids.begin(), ids.end(), c.name) == ids.end())
            throw ConfigError("problem.name: unknown problem '" + c.name + "'");
        return make_problem(c.name, c.epsilon, opt);
    }
    if (c.forcing.empty()) throw ConfigError("problem.forcing: required for custom problems");
    ProblemSpec p;
    if (c.domain == "channel") {
        p.domain = DomainSpec::channel();
    } else if (c.domain == "circle") {
        p.domain = DomainSpec::circle();
    } else if (c.domain == "ellipse") {
        try {
            p.domain = DomainSpec::ellipse(c.A, c.B);
        } catch (const Error& e) {
            throw ConfigError(std::string("problem.A/B: ") + e.what());
        }
    } else {
        throw ConfigError("problem.domain: expected channel, circle or ellipse");
    }
    if (c.variant == "linear") {
        p.variant = Variant::LinearSteady;
    } else if (c.variant == "time") {
        p.variant = Variant::TimeDependent;
    } else if (c.variant == "cubic") {
        p.variant = Variant::NonlinearCubic;
    } else {
        throw ConfigError("problem.variant: expected linear, time or cubic");
    }
    const Expression f = [&] {
        try {
            return Expression::parse(c.forcing);
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("problem.forcing: ") + e.what());
        }
    }();
    p.forcing = [f](double x, double y, double t) { return f(x, y, t); };
    p.epsilon = c.epsilon;
    p.T = c.T;
    p.rhs = opt.rhs;
    try {
        return custom_problem(p, "custom");
    } catch (const Error& e) {
        throw ConfigError(std::string("problem: ") + e.what());
    }
}

TrainConfig resolve_train(const ExperimentConfig& c, const ProblemSpec& problem) {
    TrainConfig t = c.train;
    t.p = c.method == Method::SLPinnL1 ? 1 : 2;
    if (c.psi_split == "auto") {
        t.psi_split = c.method == Method::SLPinnL1 && problem.domain.is_polar();
    } else {
        t.psi_split = c.psi_split == "true";
    }
    if (problem.is_time() && t.n_t < 2) throw ConfigError("train.n_t: time problems need at least 2 time levels");
    return t;
}

SweepConfig resolve_sweep(const ExperimentConfig& c) {
    SweepConfig s;
    s.train = c.train;
    s.time_train = c.train;
    s.width = c.width;
    s.baseline_widths = c.baseline_widths;
    s.options.amplitude = c.amplitude;
    s.options.rhs = c.rhs == "F" ? RhsConvention::F : RhsConvention::HF;
    s.options.T = c.T;
    return s;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp" + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw Error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

nlohmann::json to_json(const NetworkParams& p) {
    nlohmann::json j;
    j["architecture"] = p.architecture == Architecture::TwoLayer ? "two-layer" : "deep";
    j["input_dim"] = p.input_dim;
    j["layer_widths"] = p.layer_widths;
    const Eigen::VectorXd flat = p.flatten();
    j["flat"] = std::vector<double>(flat.data(), flat.data() + flat.size());
    return j;
}

nlohmann::json to_json(const TrainReport& r) {
    nlohmann::json j;
    j["seed"] = r.seed;
    j["wall_time_s"] = r.wall_time_s;
    j["iterations_run"] = r.iterations_run;
    j["aborted"] = r.aborted;
    j["diagnostic"] = r.diagnostic;
    j["final_loss"] = r.final_loss();
    nlohmann::json h = nlohmann::json::array();
    for (const auto& [it, loss] : r.history) h.push_back({it, loss});
    j["history"] = h;
    j["params"] = to_json(r.params);
    return j;
}

std::string field_csv(const SampleGrid& grid, const std::vector<double>& predicted,
                      const std::vector<double>& reference, const std::vector<bool>& in_metric) {
    if (predicted.size() != grid.size() || reference.size() != grid.size() || in_metric.size() != grid.size())
        throw DimensionError("field columns must match the grid size");
    std::ostringstream os;
    os << std::setprecision(17);
    // Channel coordinates already are (x, y); polar grids add the Cartesian pair.
    const bool cartesian = grid.domain.is_polar();
    for (const auto& name : grid.coordinate_names()) os << name << ',';
    os << (cartesian ? "x,y," : "") << "predicted,reference,abs_error,in_metric\n";
    const std::size_t ncoord = grid.coordinate_names().size();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t k = 0; k < ncoord; ++k) os << grid.points[i][k] << ',';
        if (cartesian) os << grid.cartesian[i][0] << ',' << grid.cartesian[i][1] << ',';
        os << predicted[i] << ',' << reference[i] << ','
           << std::abs(predicted[i] - reference[i]) << ',' << (in_metric[i] ? 1 : 0) << '\n';
    }
    return os.str();
}

double relative_error_from_field_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty field CSV");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string h;
        while (std::getline(ss, h, ',')) header.push_back(trim(h));
    }
    auto col = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ConfigError("field CSV lacks column " + name);
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t cp = col("predicted"), cr = col("reference"), cm = col("in_metric");
    std::vector<double> pred, ref;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cells.push_back(c);
        if (cells.size() != header.size()) throw ConfigError("field CSV row has the wrong number of columns");
        if (cells[cm] != "1") continue;
        pred.push_back(std::stod(cells[cp]));
        ref.push_back(std::stod(cells[cr]));
    }
    return relative_l2_error(pred, ref);
}

}  // namespace slpinn
