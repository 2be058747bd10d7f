#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "generators.hpp"
#include "skewlab/error.hpp"
#include "skewlab/hhu.hpp"

using namespace skewlab;

namespace {

constexpr double kPi = std::numbers::pi;
const double kGolden = (1.0 + std::sqrt(5.0)) / 2.0;

}  // namespace

TEST_SUITE("hhu") {

TEST_CASE("parameters") {
    HhuParameters p;
    CHECK(p.lambda == doctest::Approx(kGolden).epsilon(1e-15));
    CHECK(p.psi(kPi) == doctest::Approx(kPi).epsilon(1e-15));
    CHECK(p.psi(0.0) == 0.0);
    CHECK(p.psi_derivative(0.0) == doctest::Approx(5.0 / 3.0));
    CHECK(p.psi_derivative(kPi) == doctest::Approx(1.0 / 3.0));
    CHECK(parse_forcing("odd") == Forcing::SinMinusX);
    CHECK_THROWS(parse_forcing("tan"));
    gen::Rng r(71);
    for (int k = 0; k < 100; ++k) {
        const double x = r.uniform(-10, 10);
        CHECK(p.psi_inverse(p.psi(x)) == doctest::Approx(x).epsilon(1e-13));
    }
}

TEST_CASE("u(0) is minus the golden ratio") {
    const GraphSeries u(HhuParameters{}, GraphKind::Unstable);
    // y* = F(0) / (1 - lambda) = 1 / (1 - lambda) = -lambda
    CHECK(std::abs(u(0.0) + kGolden) < 1e-12);
}

TEST_CASE("property: graphs solve G(psi x) = lambda G(x) + F(x)") {
    gen::Rng r(72);
    for (const auto forcing : {Forcing::Cos, Forcing::SinMinusX}) {
        HhuParameters p;
        p.forcing = forcing;
        const GraphSeries u(p, GraphKind::Unstable), c(p, GraphKind::Stable);
        for (int k = 0; k < 100; ++k) {
            const double x = r.uniform(-2.9, 2.9);
            CHECK(std::abs(u(p.psi(x)) - p.lambda * u(x) - p.force(x)) < 1e-9);
            const double s = r.uniform(0.05, 3.0);
            if (p.psi(s) < kPi) CHECK(std::abs(c(p.psi(s)) - p.lambda * c(s) - p.force(s)) < 1e-9);
        }
    }
}

TEST_CASE("slope signs and the stable threshold") {
    const auto u = build_unstable_graph(HhuParameters{}, 400);
    const auto c = build_stable_graph(HhuParameters{}, 400);
    for (std::size_t i = 0; i < u.x.size(); ++i)
        if (u.x[i] > 0.01 && u.x[i] < kPi - 0.01) CHECK(u.slope[i] < 0.0);
    for (std::size_t i = 0; i < c.x.size(); ++i)
        if (c.x[i] > 0.01 && c.x[i] < kPi - 0.01) CHECK(c.slope[i] > 0.0);
    const GraphSeries us(HhuParameters{}, GraphKind::Unstable);
    const auto s = refined_slopes(us, kPi - 1e-3, 1e-5);
    CHECK(s[0] < -50.0);
    CHECK(s[1] == doctest::Approx(s[0]).epsilon(1e-3));
    CHECK(us.derivative(1.0) == doctest::Approx(refined_slopes(us, 1.0, 1e-5)[1]).epsilon(1e-6));
}

TEST_CASE("odd variant") {
    HhuParameters p;
    p.forcing = Forcing::SinMinusX;
    const GraphSeries c(p, GraphKind::Stable);
    CHECK(oddness_residual(c, 2000) < 1e-9);
    CHECK(stable_graph_bound(p, build_stable_graph(p, 400)).passed);
}

TEST_CASE("3D map is lattice equivariant") {
    for (const auto forcing : {Forcing::Cos, Forcing::SinMinusX}) {
        HhuParameters p;
        p.forcing = forcing;
        const auto sys = build_3d_system(p);
        CHECK(sys.equivariance_residual(100, 3) < 1e-9);
        const auto f = sys.fixed_point(kPi);
        const auto g = sys.map(f);
        for (int i = 0; i < 3; ++i) CHECK(g[static_cast<std::size_t>(i)] == doctest::Approx(f[static_cast<std::size_t>(i)]).epsilon(1e-12));
    }
}

TEST_CASE("jacobian matches finite differences") {
    const auto sys = build_3d_system(HhuParameters{});
    gen::Rng r(73);
    for (int k = 0; k < 20; ++k) {
        const Vec3 x{r.uniform(-3, 3), r.uniform(-3, 3), r.uniform(-3, 3)};
        const auto j = sys.jacobian(x);
        for (int c = 0; c < 3; ++c) {
            Vec3 a = x, b = x;
            a[static_cast<std::size_t>(c)] += 1e-6;
            b[static_cast<std::size_t>(c)] -= 1e-6;
            const auto fa = sys.map(a), fb = sys.map(b);
            for (int row = 0; row < 3; ++row) {
                const auto ru = static_cast<std::size_t>(row), cu = static_cast<std::size_t>(c);
                CHECK(j[ru][cu] == doctest::Approx((fa[ru] - fb[ru]) / 2e-6).epsilon(1e-6).scale(1.0));
            }
        }
    }
}

TEST_CASE("invariant tori and compact leaves") {
    const auto rep = compact_leaf_check(HhuParameters{});
    CHECK(rep.invariant_tori.size() == 2);
    CHECK(rep.graph_leaves_unbounded);
    for (std::size_t i = 1; i < rep.leaf_range.size(); ++i) CHECK(rep.leaf_range[i] > rep.leaf_range[i - 1]);
}

TEST_CASE("csv layouts") {
    const auto g = build_stable_graph(HhuParameters{}, 10);
    const auto csv = graph_csv(g);
    CHECK(csv.rfind("x,value,slope\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);
}

}
