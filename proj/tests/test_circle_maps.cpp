#include <cmath>
#include <numbers>
#include <numeric>

#include "doctest.h"
#include "generators.hpp"
#include "skewlab/circle_maps.hpp"
#include "skewlab/error.hpp"

using namespace skewlab;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// h(x) = x + a sin(2 pi x) / (2 pi), a homeomorphism for |a| < 1.
struct Warp {
    double a;
    double operator()(double x) const { return x + a * std::sin(kTwoPi * x) / kTwoPi; }
    double inverse(double y) const {
        double lo = y - 1, hi = y + 1;
        for (int i = 0; i < 200; ++i) {
            const double m = 0.5 * (lo + hi);
            ((*this)(m) < y ? lo : hi) = m;
        }
        return 0.5 * (lo + hi);
    }
};

}  // namespace

TEST_SUITE("circle_maps") {

TEST_CASE("convergents of the golden mean are Fibonacci ratios") {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    const auto c = convergents(g, 100);
    std::int64_t a = 1, b = 1;  // F_k, F_{k+1}
    for (const auto& [p, q] : c) {
        if (q == 1) continue;
        const std::int64_t next = a + b;
        a = b;
        b = next;
        CHECK(p == a);
        CHECK(q == b);
    }
    CHECK(c.back().second <= 100);
}

TEST_CASE("rigid rotations snap to their fractions") {
    for (int q = 1; q <= 12; ++q) {
        for (int p = 0; p < q; ++p) {
            if (std::gcd(p, q) != 1) continue;
            const double r = static_cast<double>(p) / q;
            const auto rot = rotation_number([r](double x) { return x + r; }, 100'000);
            CHECK(rot.rational);
            CHECK(rot.p == p);
            CHECK(rot.q == q);
        }
    }
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    const auto rot = rotation_number([g](double x) { return x + g; }, 1'000'000);
    CHECK_FALSE(rot.rational);
    CHECK(std::abs(rot.rho - g) <= rot.error_bound);
}

TEST_CASE("too few iterations are rejected") {
    CHECK_THROWS_AS(rotation_number([](double x) { return x; }, 10), DomainError);
}

TEST_CASE("property: rotation number is a conjugacy invariant") {
    gen::Rng r(31);
    for (int trial = 0; trial < 10; ++trial) {
        const Warp h{r.uniform(-0.6, 0.6)};
        const double alpha = r.uniform(0.05, 0.95);
        const CircleFn f = [&](double x) { return h(h.inverse(x) + alpha); };
        const auto rot = rotation_number(f, 200'000);
        CHECK(std::abs(rot.value() - alpha) <= rot.error_bound + 1e-12 + (rot.rational ? 1.0 / (rot.q * 1000.0) : 0.0));
    }
}

TEST_CASE("monotone lift interpolates and inverts") {
    const Warp h{0.4};
    const auto lift = MonotoneCircleLift::from_function(h, 1024);
    gen::Rng r(32);
    for (int k = 0; k < 100; ++k) {
        const double x = r.uniform(-2, 2);
        CHECK(lift(x) == doctest::Approx(h(x)).epsilon(1e-8));
        CHECK(lift.inverse(lift(x)) == doctest::Approx(x).epsilon(1e-12));
        CHECK(lift(x + 1) == doctest::Approx(lift(x) + 1).epsilon(1e-14));
    }
    CHECK_THROWS_AS(MonotoneCircleLift(std::vector<double>{0.0, 0.6, 0.5}), ValidationError);
}

TEST_CASE("semiconjugacy of a conjugated irrational rotation recovers the conjugacy") {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    const Warp h{0.5};
    const auto lift = MonotoneCircleLift::from_function([&](double x) { return h(h.inverse(x) + g); }, 4096);
    const auto s = semiconjugacy_to_rotation(lift, 1'000'000, 4096);
    double err = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double x = i / 1000.0;
        err = std::max(err, std::abs(s.p(x) - (h.inverse(x) - h.inverse(0.0))));
    }
    CHECK(err < 5e-3);
    CHECK(s.defect < 5e-3);
    CHECK_THROWS_AS(semiconjugacy_to_rotation(MonotoneCircleLift::rotation(0.25)), DomainError);
}

TEST_CASE("periodic orbit measures are atomic") {
    const auto mu = invariant_measure([](double x) { return x + 0.5 + 0.1 * std::sin(kTwoPi * x); }, 100'000, 1024);
    REQUIRE(mu.atomic());
    CHECK(mu.atoms.size() == 2);
    CHECK(mu(1.0) == doctest::Approx(1.0));
}

TEST_CASE("trig circle maps parse and validate") {
    const auto m = load_circle_map(gen::data("arnold_half.map"));
    CHECK(m.rotation == 0.5);
    CHECK(m(0.25) == doctest::Approx(0.75 + 0.1));
    m.validate();
    CHECK_THROWS_AS(parse_circle_map("rotation 0\ncoeff sin 1 0.5\n"), ValidationError);
    CHECK_THROWS_AS(parse_circle_map("rotation\n"), ParseError);
}

}
