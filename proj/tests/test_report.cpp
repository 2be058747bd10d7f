#include <cstdlib>
#include <string>

#include "doctest.h"
#include "generators.hpp"
#include "skewlab/report.hpp"

using namespace skewlab;

TEST_SUITE("report") {

TEST_CASE("sections and entries parse back") {
    Report r;
    r.section("a").set("x", 1.5).set("n", 3).set("flag", true);
    r.section("b").set("list", std::vector<double>{0.25, -1.0}).set("name", "cos(2pi(z))");
    const auto e = parse_report(r.str());
    REQUIRE(e.size() == 5);
    CHECK(e[0].section == "a");
    CHECK(e[0].value == "1.5");
    CHECK(e[2].value == "true");
    CHECK(e[3].section == "b");
    CHECK(e[3].value == "0.25, -1");
    CHECK(e[4].value == "cos(2pi(z))");
    CHECK(r.str().find("\n\n[b]\n") != std::string::npos);
}

TEST_CASE("property: reals round trip exactly") {
    gen::Rng rng(81);
    for (int k = 0; k < 1000; ++k) {
        const double x = (rng.uniform(-1, 1)) * std::pow(10.0, rng.integer(-300, 300));
        CHECK(std::strtod(format_real(x).c_str(), nullptr) == x);
    }
}

}
