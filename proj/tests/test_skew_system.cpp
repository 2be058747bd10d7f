#include <cmath>

#include "doctest.h"
#include "generators.hpp"
#include "skewlab/error.hpp"
#include "skewlab/skew_system.hpp"

using namespace skewlab;

namespace {

const IntegerMatrix kCat = IntegerMatrix::from_rows({{2, 1}, {1, 1}});

SkewProductSystem prototype() { return make_prototype(kCat, IntegerMatrix::identity(2)); }

}  // namespace

TEST_SUITE("skew_system") {

TEST_CASE("prototype fiber is the identity") {
    const auto sys = prototype();
    const auto f = sys.fiber_at(Vec{0.3, 0.7, 0});
    CHECK(f.translation());
    CHECK(f.map(0.42) == 0.42);
    CHECK(sys.bounds().min_derivative == 1.0);
}

TEST_CASE("derivative margin violation is rejected") {
    const TrigTerm steep{0.2, {0, 0, 0}, 1, Phase::Sin};  // 1 - 2 pi 0.2 < 0
    CHECK_THROWS_AS(perturb(prototype(), Perturbation::fiber_shear({steep})), ValidationError);
}

TEST_CASE("non-commuting gluing is rejected") {
    CHECK_THROWS_AS(make_prototype(kCat, IntegerMatrix::from_rows({{1, 1}, {0, 1}})), DomainError);
}

TEST_CASE("property: fiber map matches direct trig evaluation") {
    gen::Rng r(21);
    for (int trial = 0; trial < 30; ++trial) {
        const auto terms = gen::fiber_terms(r, r.integer(1, 4));
        const double theta = r.uniform();
        auto sys = perturb(perturb(prototype(), Perturbation::rotation(theta)), Perturbation::fiber_shear(terms));
        for (int k = 0; k < 10; ++k) {
            const auto v = gen::point(r, 2);
            const double z = r.uniform();
            const auto f = sys.fiber_at(v);
            CHECK(f.map(z) == doctest::Approx(gen::fiber_oracle(theta, terms, v, z)).epsilon(1e-12));
            CHECK(f.inverse(f.map(z)) == doctest::Approx(z).epsilon(1e-12));
            const double h = 1e-6;
            CHECK(f.derivative(z) == doctest::Approx((f.map(z + h) - f.map(z - h)) / (2 * h)).epsilon(1e-6));
        }
    }
}

TEST_CASE("property: forward and backward orbits are inverse") {
    gen::Rng r(22);
    for (int trial = 0; trial < 20; ++trial) {
        const auto sys = perturb(prototype(), Perturbation::fiber_shear(gen::fiber_terms(r, 3)));
        const SkewPoint p{DyadicPoint::from_real(gen::point(r, 2), 2), r.uniform()};
        // fiber Lyapunov growth limits how far the round trip stays at rounding level
        const auto q = step(sys, step(sys, p, 30), -30);
        CHECK(q.v.x == p.v.x);
        CHECK(std::abs(circle_offset(q.z - p.z)) < 1e-9);
    }
}

TEST_CASE("property: localized perturbation vanishes on the window zero set") {
    gen::Rng r(23);
    const TrigTerm window{1.0, {0, 0, 0}, 1, Phase::Sin};
    for (int trial = 0; trial < 10; ++trial) {
        const TrigTerm base{r.uniform(-0.04, 0.04), {r.integer(-2, 2), r.integer(-2, 2), 0}, 0, Phase::Sin};
        const auto sys = perturb(prototype(), Perturbation::localized({base}, {window}));
        for (int k = 0; k < 5; ++k) {
            const auto v = gen::point(r, 2);
            const auto f = sys.fiber_at(v);
            CHECK(std::abs(f.map(0.0)) < 1e-15);
            CHECK(std::abs(f.map(0.5) - 0.5) < 1e-15);
        }
    }
}

TEST_CASE("conjugate perturbation keeps the fiber over 0 a rotation conjugate") {
    const TrigTerm h{0.03, {1, 0, 0}, 1, Phase::Sin};
    const auto sys = perturb(perturb(prototype(), Perturbation::rotation(0.1)), Perturbation::conjugate({h}));
    gen::Rng r(24);
    for (int k = 0; k < 20; ++k) {
        const auto v = gen::point(r, 2);
        const double z = r.uniform();
        // h_v(z) = z + 0.03 sin(2 pi (x + z)); f_v = h_{Av} o R o h_v^{-1}
        auto hv = [&](const Vec& w, double s) { return s + 0.03 * std::sin(2 * std::numbers::pi * (w[0] + s)); };
        const Vec av = kCat.apply(v);
        const double y = sys.fiber_at(v).map(z);
        double lo = -1, hi = 2;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (hv(v, mid) < z ? lo : hi) = mid;
        }
        CHECK(y == doctest::Approx(hv(av, 0.5 * (lo + hi) + 0.1)).epsilon(1e-12));
    }
}

TEST_CASE("system files round trip") {
    gen::Rng r(25);
    for (int trial = 0; trial < 10; ++trial) {
        const auto sys = perturb(perturb(prototype(), Perturbation::rotation(r.uniform())),
                                 Perturbation::fiber_shear(gen::fiber_terms(r, 3)));
        CHECK(parse_system(print_system(sys)) == sys);
    }
    CHECK_THROWS_AS(parse_system("[base]\n2,1\n1,1\n[fiber]\nbogus 1\n"), ParseError);
    CHECK_THROWS_AS(load_system(gen::data("missing.sys")), ParseError);
}

TEST_CASE("mapping torus gluing shifts the base") {
    const auto sys = load_system(gen::data("prototype_glued.sys"));
    SkewPoint p{DyadicPoint::from_real({0.1, 0.2, 0}, 2), 1.25};
    sys.canonicalize(p);
    // (v, t) ~ (Bv, t - 1)
    CHECK(p.v.x == apply(sys.gluing(), DyadicPoint::from_real({0.1, 0.2, 0}, 2)).x);
    CHECK(p.z == doctest::Approx(0.25));
}

}
