#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "slpinn/config.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
};

Result run(const std::string& args, const fs::path& cwd) {
    const fs::path log = cwd / "cli_output.txt";
    const std::string cmd = "cd '" + cwd.string() + "' && '" SLPINN_CLI "' " + args + " > '" + log.string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("slpinn_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

void write(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST_CASE("run writes its artifacts and the field reproduces the summary") {
    const fs::path d = fresh_dir("run");
    write(d / "quick.ini",
          "[problem]\nname = square\nepsilon = 1e-4\n[method]\nwidth = 20\n"
          "[train]\niterations = 2000\nlearning_rate = 1e-2\n[output]\ndir = out\n");
    const Result r = run("run quick.ini", d);
    REQUIRE(r.code == 0);
    for (const char* f : {"train_report.json", "field.csv", "summary.json"}) CHECK(fs::exists(d / "out" / f));
    std::ifstream js(d / "out" / "summary.json");
    const nlohmann::json summary = nlohmann::json::parse(js);
    CHECK(summary["rel_l2"].get<double>() < 0.1);
    CHECK(summary["seed"] == 0);
    CHECK(summary["config"].get<std::string>().find("iterations = 2000") != std::string::npos);
    std::ifstream field(d / "out" / "field.csv");
    CHECK(std::abs(slpinn::relative_error_from_field_csv(field) - summary["rel_l2"].get<double>()) <= 1e-12);

    // Same config, same result.
    write(d / "again.ini",
          "[problem]\nname = square\nepsilon = 1e-4\n[train]\niterations = 2000\nlearning_rate = 1e-2\n"
          "[output]\ndir = out2\n");
    REQUIRE(run("run again.ini", d).code == 0);
    std::ifstream js2(d / "out2" / "summary.json");
    CHECK(nlohmann::json::parse(js2)["rel_l2"] == summary["rel_l2"]);
}

TEST_CASE("configuration errors exit with code 2") {
    const fs::path d = fresh_dir("errors");
    write(d / "missing.ini", "[problem]\nname = custom\ndomain = circle\n");
    const Result r = run("run missing.ini", d);
    CHECK(r.code == 2);
    CHECK(r.out.find("problem.forcing") != std::string::npos);
    write(d / "unknown.ini", "[train]\nsteps = 3\n");
    CHECK(run("run unknown.ini", d).code == 2);
    CHECK(run("run does_not_exist.ini", d).code == 2);
    CHECK(run("frobnicate", d).code == 2);
    CHECK(run("check no-such-suite", d).code == 2);
}

TEST_CASE("numerical aborts exit with code 3") {
    const fs::path d = fresh_dir("abort");
    write(d / "nan.ini",
          "[problem]\nname = custom\ndomain = channel\nforcing = sqrt(x - 2)\n[train]\niterations = 5\n"
          "n_eta = 4\nn_tau = 4\n[output]\ndir = out\n");
    const Result r = run("run nan.ini", d);
    CHECK(r.code == 3);
    CHECK(fs::exists(d / "out" / "train_report.json"));
}

TEST_CASE("dry run writes nothing") {
    const fs::path d = fresh_dir("dry");
    write(d / "c.ini", "[problem]\nname = circle_compatible\n[output]\ndir = out\n");
    const Result r = run("run c.ini --dry-run", d);
    CHECK(r.code == 0);
    CHECK(r.out.find("name = circle_compatible") != std::string::npos);
    CHECK_FALSE(fs::exists(d / "out"));
}

TEST_CASE("config dump lists every default") {
    const fs::path d = fresh_dir("dump");
    const Result r = run("config dump", d);
    CHECK(r.code == 0);
    write(d / "dumped.ini", r.out);
    const Result again = run("config dump dumped.ini", d);
    CHECK(again.code == 0);
    CHECK(again.out == r.out);
}

TEST_CASE("check prints machine-readable results") {
    const fs::path d = fresh_dir("check");
    const Result r = run("check compatibility", d);
    CHECK(r.code == 0);
    const nlohmann::json j = nlohmann::json::parse(r.out);
    CHECK(j["suite"] == "compatibility");
    bool saw_incompatible = false;
    for (const auto& c : j["checks"]) {
        if (c["detail"] == "classified incompatible") saw_incompatible = true;
    }
    CHECK(saw_incompatible);
    const Result g = run("check gradients", d);
    CHECK(g.code == 0);
    CHECK(nlohmann::json::parse(g.out)["passed"] == true);
}

TEST_CASE("table1 with a reduced budget") {
    const fs::path d = fresh_dir("table1");
    const Result r = run("table1 --out t1 --iterations 0 --problems square,circle_compatible --epsilons 1e-6", d);
    CHECK(r.code == 0);
    std::ifstream csv(d / "t1" / "table1.csv");
    std::string line;
    int rows = -1;
    while (std::getline(csv, line)) ++rows;
    CHECK(rows == 6);
    CHECK(fs::exists(d / "t1" / "table1.txt"));
}
