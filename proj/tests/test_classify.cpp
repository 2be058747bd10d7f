#include <cmath>
#include <numbers>

#include "doctest.h"
#include "generators.hpp"
#include "skewlab/classify.hpp"
#include "skewlab/error.hpp"

using namespace skewlab;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

SkewProductSystem prototype() {
    return make_prototype(IntegerMatrix::from_rows({{2, 1}, {1, 1}}), IntegerMatrix::identity(2));
}

ClassifyOptions quick() {
    ClassifyOptions o;
    o.grid = 128;
    o.rotation_iters = 100'000;
    return o;
}

}  // namespace

TEST_SUITE("classify") {

TEST_CASE("the prototype is jointly integrable with theta 0") {
    const auto rep = classify(prototype(), quick());
    CHECK(rep.tag == CaseTag::JointlyIntegrable);
    CHECK(rep.theta() == 0.0);
    CHECK(rep.max_displacement == 0.0);
}

TEST_CASE("rational rotations give a leaf period equal to the denominator") {
    for (int q : {2, 3, 4, 5}) {
        const auto sys = perturb(prototype(), Perturbation::rotation(1.0 / q));
        const auto rep = classify(sys, quick());
        CHECK(rep.tag == CaseTag::JointlyIntegrable);
        CHECK(rep.rotation.rational);
        CHECK(rep.rotation.q == q);
        CHECK(rep.n == q);
        CHECK(rep.theta() == 1.0 / q);
        CHECK(rep.period_residual < 1e-12);
    }
}

TEST_CASE("irrational rotation carries a semiconjugacy") {
    const auto rep = classify(load_system(gen::data("rotation_golden.sys")), quick());
    CHECK(rep.tag == CaseTag::JointlyIntegrable);
    CHECK(rep.irrational_case);
    REQUIRE(rep.semiconjugacy.has_value());
    CHECK(rep.semiconjugacy->defect < 1e-3);
}

TEST_CASE("accessible and laminated examples") {
    const auto acc = classify(load_system(gen::data("accessible.sys")), quick());
    CHECK(acc.tag == CaseTag::Accessible);
    CHECK(acc.k.empty());
    CHECK(acc.min_displacement > 1e-5);

    const auto lam = classify(load_system(gen::data("localized.sys")), quick());
    CHECK(lam.tag == CaseTag::Laminated);
    REQUIRE(lam.k.size() == 2);
    CHECK(lam.k[0].contains(0.0));
    CHECK(lam.k[1].contains(0.5));
    CHECK(lam.k_invariance_residual < 1e-12);
    CHECK(lam.intervals.size() == 2);

    const auto sc = classify(load_system(gen::data("localized_scaling.sys")), quick());
    REQUIRE(sc.intervals.size() == 2);
    for (const auto& iv : sc.intervals) {
        CHECK(iv.sub_case == IntervalCase::Scaling);
        REQUIRE(iv.fixed_height.has_value());
        CHECK(iv.interval.contains(*iv.fixed_height));
        CHECK(std::abs(iv.lambda - 1.0) > 1e-3);
    }
}

TEST_CASE("property: Birkhoff averages of fiber rotations match closed-form sums") {
    gen::Rng r(51);
    for (int trial = 0; trial < 10; ++trial) {
        const double theta = r.uniform(0.01, 0.99);
        const auto sys = perturb(prototype(), Perturbation::rotation(theta));
        const SkewPoint p = random_point(77, static_cast<std::uint64_t>(trial), 2);
        const std::int64_t n = 2000;
        const TestFunction cz{{0, 0, 0}, 1, Phase::Cos};
        double expect = 0.0;
        for (std::int64_t k = 1; k <= n; ++k) expect += std::cos(kTwoPi * (p.z + static_cast<double>(k) * theta));
        CHECK(birkhoff_average(sys, cz, p, n) == doctest::Approx(expect / n).epsilon(1e-9).scale(1.0));

        const TestFunction cx{{1, 0, 0}, 0, Phase::Cos};
        DyadicPoint v = p.v;
        double base = 0.0;
        for (std::int64_t k = 1; k <= n; ++k) {
            v = apply(sys.base().inverse(), v);
            base += std::cos(kTwoPi * v.to_real(2)[0]);
        }
        CHECK(birkhoff_average(sys, cx, p, n, Direction::Backward) == doctest::Approx(base / n).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("test families") {
    const auto d = default_test_functions(2);
    CHECK(d.size() == 6);
    CHECK(d[3].name(2) == "cos(2pi(z))");
    // one member per +- pair of nonzero frequency vectors in {-1,0,1}^3, sine and cosine each
    CHECK(trig_test_family(2, 1).size() == 2 * (27 - 1) / 2);
    CHECK_THROWS_AS(trig_test_family(2, -1), DomainError);
}

TEST_CASE("random points are reproducible and in range") {
    gen::Rng r(52);
    for (int k = 0; k < 100; ++k) {
        const auto seed = r.next(), stream = r.next();
        const auto a = random_point(seed, stream, 3, 0.2, 0.3);
        const auto b = random_point(seed, stream, 3, 0.2, 0.3);
        CHECK(a.v.x == b.v.x);
        CHECK(a.z == b.z);
        CHECK(a.z >= 0.2);
        CHECK(a.z < 0.3);
    }
    CHECK(random_point(1, 0, 2).z != random_point(1, 1, 2).z);
}

TEST_CASE("rational leaves are ergodic components with matching integrals") {
    const auto sys = load_system(gen::data("rotation_quarter.sys"));
    const auto rep = classify(sys, quick());
    DecomposeOptions o;
    o.n_orbits = 4;
    o.n_iters = 4000;
    const auto tests = default_test_functions(2);
    const auto d = decompose(sys, rep, tests, o);
    CHECK(d.n == 4);
    CHECK(d.components.size() == 16);
    for (const auto& c : d.components) {
        CHECK(c.mean[3] == doctest::Approx(c.integral[3]).epsilon(0.02).scale(1.0));
        CHECK(c.integral[3] == doctest::Approx(std::cos(kTwoPi * c.support.lo)).epsilon(1e-12));
    }
}

TEST_CASE("projection of the lamination") {
    const auto sys = load_system(gen::data("localized.sys"));
    const auto rep = classify(sys, quick());
    const auto p = build_projection(sys, rep, 64, 6);
    CHECK(p.p.front() == 0.0);
    CHECK(p.p.back() == doctest::Approx(1.0));
    for (std::size_t i = 1; i < p.p.size(); ++i) CHECK(p.p[i] >= p.p[i - 1]);
    REQUIRE(p.lamination_points.size() == 2);
    // the swap z -> z + 1/2 combined with x -> -x is a symmetry, so the leaves split the mass evenly
    CHECK(p.lamination_points[1] == doctest::Approx(0.5).epsilon(1e-3));
    const auto acc = classify(load_system(gen::data("accessible.sys")), quick());
    CHECK_THROWS_AS(build_projection(load_system(gen::data("accessible.sys")), acc), DomainError);
}

}
