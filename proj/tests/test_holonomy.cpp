#include <cmath>
#include <numbers>

#include "doctest.h"
#include "generators.hpp"
#include "skewlab/error.hpp"
#include "skewlab/holonomy.hpp"

using namespace skewlab;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

SkewProductSystem prototype() {
    return make_prototype(IntegerMatrix::from_rows({{2, 1}, {1, 1}}), IntegerMatrix::identity(2));
}

SkewProductSystem accessible() {
    return perturb(prototype(), Perturbation::fiber_shear({TrigTerm{0.05, {1, 0, 0}, 0, Phase::Sin}}));
}

Vec scaled(const Vec& e, double t) { return Vec{e[0] * t, e[1] * t, e[2] * t}; }
Vec plus(const Vec& a, const Vec& b) { return Vec{a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }

}  // namespace

TEST_SUITE("holonomy") {

TEST_CASE("translation fibers have a closed-form stable holonomy") {
    // phi = z + c(v): the stable transport from v to w is z + sum_n (c(A^n v) - c(A^n w)).
    const auto sys = accessible();
    const auto& es = sys.base().stable()[0];
    gen::Rng r(41);
    for (int trial = 0; trial < 10; ++trial) {
        const Vec v = gen::point(r, 2);
        const Vec d = scaled(es.vector, r.uniform(-0.8, 0.8));
        // A^n v exactly on the dyadic grid; A^n (w - v) = sigma^n d along the stable direction.
        DyadicPoint a = DyadicPoint::from_real(v, 2);
        const Vec v0 = a.to_real(2);
        const LeafTransport t(sys, LeafKind::Stable, v0, d, 80);
        double series = 0.0, shrink = 1.0;
        for (int n = 0; n < 120; ++n) {
            const double x = a.to_real(2)[0];
            series += 0.05 * (std::sin(kTwoPi * x) - std::sin(kTwoPi * (x + shrink * d[0])));
            a = apply(sys.base().matrix(), a);
            shrink *= es.eigenvalue;
        }
        CHECK(std::abs(t(0.3) - 0.3 - series) < 1e-12);
        CHECK(t.tail_bound() < 1e-9);
        CHECK(t.derivative(0.3) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("prototype su-loops are the identity") {
    const auto sys = prototype();
    for (const auto& loop : generator_loops(sys.base())) {
        const SuLoopMap g(sys, loop, 80);
        for (double z : {0.0, 0.25, 0.5, 0.9}) CHECK(g(z) == z);
    }
}

TEST_CASE("generator loops close on the lattice basis") {
    gen::Rng r(42);
    for (int trial = 0; trial < 20; ++trial) {
        const ToralAutomorphism a(gen::hyperbolic2(r));
        const auto loops = generator_loops(a);
        REQUIRE(loops.size() == 2);
        for (int i = 0; i < 2; ++i) {
            const auto cv = loops[static_cast<std::size_t>(i)].closing_vector(2);
            for (int j = 0; j < 2; ++j) CHECK(std::abs(cv[static_cast<std::size_t>(j)]) == (i == j ? 1 : 0));
        }
    }
}

TEST_CASE("off-leaf endpoints are rejected") {
    const auto sys = accessible();
    const BaseLeafPoint from{TorusPoint{2, {0.1, 0.1, 0}}, 0, 0.0};
    BaseLeafPoint to = from;
    to.anchor.coords[0] = 0.3;
    CHECK_THROWS_AS(stable_holonomy(sys, from, to, 80, 64), DomainError);
}

TEST_CASE("property: stable holonomies compose along a leaf") {
    const auto sys = perturb(prototype(), Perturbation::fiber_shear({TrigTerm{0.02, {1, 0, 0}, 1, Phase::Sin},
                                                                     TrigTerm{0.03, {0, 1, 0}, 0, Phase::Cos}}));
    gen::Rng r(43);
    const auto& es = sys.base().stable()[0];
    for (int trial = 0; trial < 20; ++trial) {
        const Vec v = gen::point(r, 2);
        const double s1 = r.uniform(-0.5, 0.5), s2 = r.uniform(-0.5, 0.5);
        const LeafTransport xy(sys, LeafKind::Stable, v, scaled(es.vector, s1), 80);
        const LeafTransport yz(sys, LeafKind::Stable, plus(v, scaled(es.vector, s1)), scaled(es.vector, s2), 80);
        const LeafTransport xz(sys, LeafKind::Stable, v, scaled(es.vector, s1 + s2), 80);
        const double z = r.uniform();
        const double tail = xy.tail_bound() + yz.tail_bound() + xz.tail_bound();
        CHECK(std::abs(yz(xy(z)) - xz(z)) < 3 * tail + 1e-15);
    }
}

TEST_CASE("property: holonomy derivative matches finite differences") {
    const auto sys = load_system(gen::data("localized.sys"));
    gen::Rng r(44);
    for (int trial = 0; trial < 10; ++trial) {
        const auto kind = trial % 2 ? LeafKind::Stable : LeafKind::Unstable;
        const auto& e = kind == LeafKind::Stable ? sys.base().stable()[0] : sys.base().unstable()[0];
        const Vec v = gen::point(r, 2);
        const Vec d = scaled(e.vector, r.uniform(-0.7, 0.7));
        const LeafTransport t(sys, kind, v, d, 80);
        const double z = r.uniform(), h = 1e-5;
        const double fd = (t(z + h) - t(z - h)) / (2 * h);
        CHECK(holonomy_derivative(sys, kind, v, d, z, 80) == doctest::Approx(fd).epsilon(1e-6));
        CHECK(t.derivative(z) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("compact classes of the localized system") {
    const auto sys = load_system(gen::data("localized.sys"));
    const auto k = detect_compact_classes(sys, generator_loops(sys.base()), 128);
    CHECK(k.contains(0.0));
    CHECK(k.contains(0.5));
    CHECK_FALSE(k.contains(0.25));
    CHECK(k.complement().size() == 2);
    const auto acc = detect_compact_classes(accessible(), generator_loops(accessible().base()), 64);
    CHECK(acc.empty());
    CHECK(acc.min_displacement > 1e-5);
}

TEST_CASE("height intervals wrap through zero") {
    const HeightInterval w{0.9, 1.1};
    CHECK(w.contains(0.05));
    CHECK(w.contains(0.95));
    CHECK_FALSE(w.contains(0.5));
    CHECK(w.length() == doctest::Approx(0.2));
}

}
