#include <cmath>

#include "doctest.h"
#include "generators.hpp"
#include "skewlab/error.hpp"
#include "skewlab/torus.hpp"

using namespace skewlab;

TEST_SUITE("torus") {

TEST_CASE("cat map eigenvalues are the golden ratio squared and its inverse") {
    const auto cat = IntegerMatrix::from_rows({{2, 1}, {1, 1}});
    const ToralAutomorphism a(cat);
    const double phi2 = (3.0 + std::sqrt(5.0)) / 2.0;
    REQUIRE(a.unstable().size() == 1);
    REQUIRE(a.stable().size() == 1);
    CHECK(a.unstable()[0].eigenvalue == doctest::Approx(phi2).epsilon(1e-14));
    CHECK(a.stable()[0].eigenvalue == doctest::Approx(1.0 / phi2).epsilon(1e-14));
    CHECK(a.splitting_residual() < 1e-13);
}

TEST_CASE("determinant, trace and inverse of small matrices") {
    const auto m = IntegerMatrix::from_rows({{3, 2, 1}, {2, 2, 1}, {1, 1, 1}});
    CHECK(m.determinant() == 1);
    CHECK(m.trace() == 6);
    CHECK((m * m.inverse()).is_identity());
    CHECK(parse_matrix("2,1;1,1") == IntegerMatrix::from_rows({{2, 1}, {1, 1}}));
}

TEST_CASE("non-hyperbolic and non-unimodular input") {
    CHECK_FALSE(check_hyperbolic(IntegerMatrix::from_rows({{1, 1}, {0, 1}})));
    CHECK_THROWS_AS(check_hyperbolic(IntegerMatrix::from_rows({{2, 0}, {0, 1}})), DomainError);
    CHECK_THROWS_AS(ToralAutomorphism(IntegerMatrix::from_rows({{1, 1}, {0, 1}})), DomainError);
}

TEST_CASE("property: 2x2 eigenvalues match the characteristic quadratic") {
    gen::Rng r(11);
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = gen::hyperbolic2(r);
        const double t = static_cast<double>(m.trace());
        const double d = static_cast<double>(m.determinant());
        const double disc = std::sqrt(t * t - 4.0 * d);
        const double big = std::max(std::abs((t + disc) / 2), std::abs((t - disc) / 2));
        const ToralAutomorphism a(m);
        CHECK(a.unstable()[0].rate() == doctest::Approx(big).epsilon(1e-12));
        CHECK(a.unstable()[0].rate() * a.stable()[0].rate() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(a.splitting_residual() < 1e-10 * big);
    }
}

TEST_CASE("property: commuting check agrees with explicit products") {
    gen::Rng r(12);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = gen::hyperbolic2(r);
        const auto b = gen::hyperbolic2(r);
        CHECK(check_commuting(a, b) == (a * b == b * a));
        CHECK(check_commuting(a, a * a));
    }
}

TEST_CASE("property: dyadic orbits agree with real arithmetic and invert exactly") {
    gen::Rng r(13);
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = gen::hyperbolic2(r);
        const auto v = gen::point(r, 2);
        const auto p = DyadicPoint::from_real(v, 2);
        const auto q = apply(m, p).to_real(2);
        const auto w = p.to_real(2);
        for (int i = 0; i < 2; ++i) {
            const double direct = static_cast<double>(m(i, 0)) * w[0] + static_cast<double>(m(i, 1)) * w[1];
            CHECK(std::abs(circle_offset(direct - q[static_cast<std::size_t>(i)])) < 1e-12);
        }
        DyadicPoint x = p;
        for (int k = 0; k < 500; ++k) x = apply(m, x);
        for (int k = 0; k < 500; ++k) x = apply(m.inverse(), x);
        CHECK(x.x == p.x);
    }
}

TEST_CASE("wrap and offsets") {
    CHECK(wrap_unit(-0.25) == 0.75);
    CHECK(wrap_unit(3.5) == 0.5);
    CHECK(circle_offset(0.9) == doctest::Approx(-0.1));
    const auto b = IntegerMatrix::identity(2);
    const MappingTorusPoint p{TorusPoint{2, {0.25, 0.5, 0}}, 2.5};
    CHECK(p.canonical(b).height == 0.5);
}

}
