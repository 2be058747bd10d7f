#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "generators.hpp"
#include "skewlab/report.hpp"

namespace {

struct Run {
    int status;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(SKEWLAB_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    while (const auto n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
    const int raw = pclose(pipe);
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

std::string lookup(const std::string& report, const std::string& section, const std::string& key) {
    for (const auto& e : skewlab::parse_report(report))
        if (e.section == section && e.key == key) return e.value;
    return "<missing>";
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("exit codes") {
    CHECK(run("classify --input " + gen::data("prototype.sys")).status == 0);
    CHECK(run("classify --input " + gen::data("does_not_exist.sys")).status == 1);
    CHECK(run("classify").status == 1);
    CHECK(run("--help").status == 0);
    const auto wide = run("classify --input " + gen::data("localized.sys") + " --tol 0.01");
    CHECK(wide.status == 2);
    CHECK(wide.out.find("case = inconclusive") != std::string::npos);
    CHECK(run("plante --input " + gen::data("translation.act")).status == 1);
    CHECK(run("orbit --input " + gen::data("prototype.sys") + " --direction sideways").status == 1);
}

TEST_CASE("reports are deterministic") {
    const std::string args = "decompose --input " + gen::data("rotation_quarter.sys") + " --iters 2000 --orbits 3 --seed 9";
    const auto a = run(args), b = run(args);
    CHECK(a.status == 0);
    CHECK(a.out == b.out);
    CHECK(a.out != run("decompose --input " + gen::data("rotation_quarter.sys") + " --iters 2000 --orbits 3 --seed 10").out);
}

TEST_CASE("output directory holds the report and csv files") {
    const auto dir = std::filesystem::temp_directory_path() / "skewlab_cli_test";
    std::filesystem::remove_all(dir);
    const auto r = run("rotnum --input " + gen::data("golden.map") + " --iters 100000 --out " + dir.string());
    CHECK(r.status == 0);
    CHECK(slurp(dir / "rotnum.report") == r.out);
    CHECK(std::filesystem::exists(dir / "lift.csv"));
    CHECK(std::filesystem::exists(dir / "semiconjugacy.csv"));
    CHECK(slurp(dir / "measure.csv").rfind("x,", 0) == 0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("provenance block") {
    const auto r = run("hhu --variant odd --grid 200");
    CHECK(r.status == 0);
    CHECK(r.out.rfind("[provenance]\ntool = skewlab\n", 0) == 0);
    CHECK(r.out.find("variant = odd") != std::string::npos);
}

TEST_CASE("command examples") {
    const auto proto = run("classify --input " + gen::data("prototype.sys"));
    CHECK(lookup(proto.out, "classification", "case") == "jointly_integrable");
    const auto loc = run("classify --input " + gen::data("localized.sys"));
    CHECK(loc.status == 0);
    CHECK(lookup(loc.out, "classification", "case") == "laminated");
    const auto rot = run("rotnum --input " + gen::data("rigid_quarter.map"));
    CHECK(lookup(rot.out, "rotation", "rational") == "true");
    CHECK(lookup(rot.out, "rotation", "value") == "0.25");
    const auto pl = run("plante --input " + gen::data("affine2x.act"));
    CHECK(std::strtod(lookup(pl.out, "scaling", "lambda").c_str(), nullptr) == 2.0);
    const auto hhu = run("hhu --variant cos --grid 2000");
    CHECK(hhu.status == 0);
    CHECK(lookup(hhu.out, "unstable_graph", "u0") == "-1.6180339887498947");
    CHECK(lookup(hhu.out, "cone", "passed") != "<missing>");
}

}
