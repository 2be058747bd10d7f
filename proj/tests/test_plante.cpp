#include <cmath>
#include <set>

#include "doctest.h"
#include "generators.hpp"
#include "skewlab/error.hpp"
#include "skewlab/plante.hpp"

using namespace skewlab;

namespace {

LineAction translations(double lambda) {
    LineAction a;
    a.generators = {{1.0, 1.0}, {1.0, std::sqrt(2.0)}};
    a.conjugator = {lambda, 0.0};
    return a;
}

std::vector<int> random_word(gen::Rng& r, int letters, int length) {
    std::vector<int> w;
    for (int i = 0; i < length; ++i) {
        const int g = r.integer(1, letters);
        w.push_back(r.integer(0, 1) ? g : -g);
    }
    return w;
}

}  // namespace

TEST_SUITE("plante") {

TEST_CASE("charts are increasing bijections") {
    gen::Rng r(61);
    for (const Chart c : {Chart{ChartKind::Cube, 0, 1}, Chart{ChartKind::SinBump, 0.3, 4.0}}) {
        c.validate();
        for (int k = 0; k < 100; ++k) {
            const double t = r.uniform(-6, 6);
            CHECK(c.inverse(c(t)) == doctest::Approx(t).epsilon(1e-12));
            CHECK(c.derivative(t) > 0.0);
        }
    }
    CHECK_THROWS_AS((Chart{ChartKind::SinBump, 5.0, 1.0}).validate(), ValidationError);
}

TEST_CASE("scaling is recovered for translation groups") {
    for (double lambda : {2.0, 3.0, 0.5}) {
        const auto a = translations(lambda);
        const auto mu = invariant_measure(a);
        const auto tau = translation_number(a, mu);
        CHECK(tau.tau[0] == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(tau.tau[1] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
        CHECK(std::abs(conjugation_scaling(a, mu, tau) - lambda) < 1e-12);
    }
}

TEST_CASE("property: tau is a homomorphism on random words") {
    gen::Rng r(62);
    for (const char* file : {"affine2x.act", "cube.act", "sinbump.act"}) {
        const auto a = load_action(gen::data(file));
        const auto mu = invariant_measure(a);
        const auto tau = translation_number(a, mu);
        for (int k = 0; k < 100; ++k) {
            const auto w = random_word(r, static_cast<int>(a.size()), r.integer(1, 8));
            double expect = 0.0;
            for (int l : w) expect += (l > 0 ? 1.0 : -1.0) * tau.tau[static_cast<std::size_t>(std::abs(l) - 1)];
            CHECK(std::abs(tau_word(a, mu, w, r.uniform(-2, 2)) - expect) < 1e-10);
        }
    }
}

TEST_CASE("master semiconjugacy satisfies both functional equations") {
    for (const char* file : {"affine2x.act", "cube.act", "sinbump.act", "integers.act"}) {
        const auto a = load_action(gen::data(file));
        const auto p = master_semiconjugacy(a, 400);
        CHECK(p.residual_g < 1e-8);
        CHECK(p.residual_f < 1e-8);
        CHECK(std::abs(p(p.fixed_point)) < 1e-8);
        CHECK(std::abs(a.f(p.fixed_point) - p.fixed_point) < 1e-9);
        CHECK(p.zero_lo <= p.fixed_point);
        CHECK(p.fixed_point <= p.zero_hi);
    }
}

TEST_CASE("property: P is monotone and intertwines generators off the grid") {
    const auto a = load_action(gen::data("sinbump.act"));
    const auto p = master_semiconjugacy(a, 200);
    gen::Rng r(63);
    for (int k = 0; k < 200; ++k) {
        const double x = r.uniform(-4, 4), y = r.uniform(-4, 4);
        if (x < y) CHECK(p(x) <= p(y));
        for (std::size_t i = 0; i < a.size(); ++i)
            CHECK(p(a.generator(i, x)) - p(x) == doctest::Approx(p.tau.tau[i]).epsilon(1e-9));
        CHECK(p(a.f(x)) == doctest::Approx(p.lambda * p(x)).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("a commuting map fixes a point of the zero set") {
    const auto a = load_action(gen::data("affine2x.act"));
    const auto p = master_semiconjugacy(a);
    // h = f^2 commutes with f
    const auto x = commuting_fixed_point(a, p, [&](double t) { return a.f(a.f(t)); });
    REQUIRE(x.has_value());
    CHECK(std::abs(p(*x)) < 1e-9);
    CHECK(std::abs(a.f(a.f(*x)) - *x) < 1e-9);
    CHECK_THROWS_AS(commuting_fixed_point(a, p, [](double t) { return t + 0.37; }), DomainError);
}

TEST_CASE("excluded and unsupported actions") {
    CHECK_THROWS_AS(master_semiconjugacy(load_action(gen::data("translation.act"))), DomainError);
    LineAction affine = translations(2.0);
    affine.generators[0].a = 2.0;
    CHECK_THROWS_AS(invariant_measure(affine), UnsupportedError);
    CHECK_THROWS_AS(parse_action("gamma real\ngenerator 1\n"), ParseError);
}

TEST_CASE("property: fixed-coset map image matches det(M - I)") {
    gen::Rng r(64);
    for (int trial = 0; trial < 30; ++trial) {
        const auto m = gen::hyperbolic2(r);
        const auto rep = fixed_coset_check(m, 3);
        const auto n = m - IntegerMatrix::identity(2);
        CHECK(rep.det == n(0, 0) * n(1, 1) - n(0, 1) * n(1, 0));
        CHECK(rep.injective == (rep.det != 0));
        CHECK(rep.bijective == (std::abs(rep.det) == 1));
        // brute force: count lattice points of the box mapped onto the same image
        std::set<std::pair<std::int64_t, std::int64_t>> seen;
        std::int64_t collisions = 0;
        for (std::int64_t i = -3; i <= 3; ++i)
            for (std::int64_t j = -3; j <= 3; ++j)
                if (!seen.emplace(n(0, 0) * i + n(0, 1) * j, n(1, 0) * i + n(1, 1) * j).second) ++collisions;
        CHECK(rep.box_collisions == collisions);
        CHECK((rep.missing_unit >= 0) == !rep.bijective);
    }
}

}
