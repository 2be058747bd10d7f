#include "skewlab/hhu.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>

#include "skewlab/error.hpp"
#include "skewlab/parallel.hpp"

namespace skewlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kStopTail = 1e-17;
constexpr double kMaxTail = 1e-12;

// |F(x) - F(x*)| <= K |x - x*|^p near the fixed point x*.
struct Flatness {
    double k;
    double p;
};

Flatness flatness(Forcing f, bool at_zero) {
    if (f == Forcing::Cos) return {0.5, 2.0};
    return at_zero ? Flatness{1.0 / 6.0, 3.0} : Flatness{2.0, 1.0};
}

double max_force_slope(Forcing f) { return f == Forcing::Cos ? 1.0 : 2.0; }

Vec3 normalized(double a, double b, double c) {
    const double n = std::sqrt(a * a + b * b + c * c);
    return {a / n, b / n, c / n};
}

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

Vec3 mul(const Mat3& m, const Vec3& v) {
    Vec3 out{};
    for (int i = 0; i < 3; ++i) out[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
    return out;
}

Mat3 inverse(const Mat3& m) {
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    Mat3 inv{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const int i1 = (j + 1) % 3, i2 = (j + 2) % 3, j1 = (i + 1) % 3, j2 = (i + 2) % 3;
            inv[i][j] = (m[i1][j1] * m[i2][j2] - m[i1][j2] * m[i2][j1]) / det;
        }
    }
    return inv;
}

}  // namespace

Forcing parse_forcing(const std::string& name) {
    if (name == "cos") return Forcing::Cos;
    if (name == "odd" || name == "sin_x_minus_x") return Forcing::SinMinusX;
    throw ParseError("unknown variant '" + name + "' (expected cos or odd)");
}

const char* to_string(Forcing f) { return f == Forcing::Cos ? "cos" : "odd"; }

double HhuParameters::psi(double x) const { return x + 2.0 / 3.0 * std::sin(x); }
double HhuParameters::psi_derivative(double x) const { return 1.0 + 2.0 / 3.0 * std::cos(x); }

double HhuParameters::psi_inverse(double y) const {
    // |psi(x) - x| <= 2/3 and psi' >= 1/3
    double lo = y - 2.0 / 3.0, hi = y + 2.0 / 3.0;
    double x = y;
    for (int it = 0; it < 100; ++it) {
        const double r = psi(x) - y;
        if (r == 0.0) return x;
        if (r > 0.0) hi = x;
        else lo = x;
        double next = x - r / psi_derivative(x);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-17 * std::max(1.0, std::abs(x))) return next;
        x = next;
    }
    return x;
}

double HhuParameters::force(double x) const {
    return forcing == Forcing::Cos ? std::cos(x) : std::sin(x) - x;
}

double HhuParameters::force_derivative(double x) const {
    return forcing == Forcing::Cos ? -std::sin(x) : std::cos(x) - 1.0;
}

double HhuParameters::fixed_height(double x_star) const { return force(x_star) / (1.0 - lambda); }

GraphSeries::GraphSeries(HhuParameters params, GraphKind kind, int depth)
    : params_(params), kind_(kind), depth_(depth) {
    if (depth < 1) throw DomainError("graph series depth must be positive");
    if (params.lambda <= 1.0) throw DomainError("graph series need lambda > 1");
}

GraphSeries::Eval GraphSeries::eval(double x) const {
    const auto& p = params_;
    const double inf = std::numeric_limits<double>::infinity();
    Eval out;
    if (kind_ == GraphKind::Unstable) {
        // u(x) - u(0) = sum_{k>=1} lambda^{k-1} (F(x_{-k}) - F(0)), x_{-k} = psi^{-k}(x) -> 0.
        // psi'(0) = 5/3 and F - F(0) = O(x^2) make lambda (3/5)^2 < 1, so the series converges.
        if (!(x > -kPi && x < kPi)) throw DomainError("u is defined on (-pi, pi)");
        const Flatness fl = flatness(p.forcing, true);
        const double f0 = p.force(0.0);
        double sum = 0.0, dsum = 0.0, lam = 1.0, d = 1.0, xk = x;
        out.tail = inf;
        for (int k = 1; k <= depth_; ++k) {
            xk = p.psi_inverse(xk);
            d /= p.psi_derivative(xk);
            sum += lam * (p.force(xk) - f0);
            dsum += lam * p.force_derivative(xk) * d;
            if (xk == 0.0) {
                out.tail = 0.0;
                break;
            }
            const double ax = std::abs(xk);
            const double r = 1.0 / p.psi_derivative(ax);
            const double q = p.lambda * std::pow(r, fl.p);
            if (q < 1.0) {
                const double geo = q / (1.0 - q);
                const double tail = lam * fl.k * std::pow(ax, fl.p) * geo;
                const double dtail = lam * fl.p * fl.k * std::pow(ax, fl.p - 1.0) * d * geo;
                out.tail = tail;
                if (tail < kStopTail * (1.0 + std::abs(sum)) && dtail < kStopTail * (1.0 + std::abs(dsum))) break;
            }
            lam *= p.lambda;
        }
        out.value = p.fixed_height(0.0) + sum;
        out.derivative = dsum;
        return out;
    }
    // c(x) - c(x*) = -sum_{k>=0} lambda^{-(k+1)} (F(x_k) - F(x*)), x_k = psi^k(x) -> x* = +-pi.
    if (!(x >= -kPi && x <= kPi) || x == 0.0) throw DomainError("c is defined on [-pi, 0) and (0, pi]");
    const double xs = x > 0.0 ? kPi : -kPi;
    const Flatness fl = flatness(p.forcing, false);
    const double fs = p.force(xs);
    const double slope = max_force_slope(p.forcing);
    double sum = 0.0, dsum = 0.0, lam = 1.0 / p.lambda, d = 1.0, xk = x;
    out.tail = inf;
    for (int k = 0; k < depth_; ++k) {
        sum -= lam * (p.force(xk) - fs);
        dsum -= lam * p.force_derivative(xk) * d;
        const double gap = std::abs(xk - xs);
        if (gap < kPi / 2.0) {
            const double r = p.psi_derivative(xk);
            const double s = r / p.lambda;
            const double geo = s / (1.0 - s);
            const double tail = lam * fl.k * std::pow(gap, fl.p) * geo;
            const double dtail = lam * slope * d * geo;
            out.tail = tail;
            if (tail < kStopTail * (1.0 + std::abs(sum)) && dtail < kStopTail * (1.0 + std::abs(dsum))) break;
        }
        d *= p.psi_derivative(xk);
        xk = p.psi(xk);
        lam /= p.lambda;
    }
    out.value = p.fixed_height(xs) + sum;
    out.derivative = dsum;
    return out;
}

double GraphSeries::operator()(double x) const { return eval(x).value; }
double GraphSeries::derivative(double x) const { return eval(x).derivative; }

double GraphSeries::tail(double x) const {
    const double t = eval(x).tail;
    if (!(t < kMaxTail)) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "graph series did not converge at x = %.17g (tail estimate %.3g)", x, t);
        throw NumericalError(buf);
    }
    return t;
}

namespace {

InvariantGraph build_graph(const HhuParameters& params, GraphKind kind, double lo, double hi, int grid, int depth) {
    if (grid < 2) throw DomainError("graph grid must have at least 2 points");
    const GraphSeries g(params, kind, depth);
    InvariantGraph out;
    out.kind = kind;
    out.lo = lo;
    out.hi = hi;
    const auto n = static_cast<std::size_t>(grid);
    out.x.resize(n);
    out.value.resize(n);
    out.slope.resize(n);
    std::vector<double> residual(n), tail(n);
    parallel_for(n, [&](std::size_t i) {
        const double x = lo + (hi - lo) * (static_cast<double>(i) + 0.5) / grid;
        out.x[i] = x;
        out.value[i] = g(x);
        out.slope[i] = g.derivative(x);
        tail[i] = g.tail(x);
        residual[i] = std::abs(g(params.psi(x)) - params.lambda * out.value[i] - params.force(x));
    });
    out.residual = *std::max_element(residual.begin(), residual.end());
    out.tail = *std::max_element(tail.begin(), tail.end());
    return out;
}

}  // namespace

InvariantGraph build_unstable_graph(const HhuParameters& params, int grid, int depth) {
    return build_graph(params, GraphKind::Unstable, -kPi, kPi, grid, depth);
}

InvariantGraph build_stable_graph(const HhuParameters& params, int grid, int depth) {
    return build_graph(params, GraphKind::Stable, 0.0, kPi, grid, depth);
}

std::vector<double> refined_slopes(const GraphSeries& g, double x0, double h, int refinements) {
    std::vector<double> out;
    for (int i = 0; i <= refinements; ++i) {
        out.push_back((g(x0 + h) - g(x0 - h)) / (2.0 * h));
        h /= 2.0;
    }
    return out;
}

BoundednessCheck stable_graph_bound(const HhuParameters& params, const InvariantGraph& c) {
    BoundednessCheck out;
    double fmax = 0.0;
    constexpr int kSamples = 2000;
    for (int i = 0; i <= kSamples; ++i) fmax = std::max(fmax, std::abs(params.force(kPi * i / kSamples)));
    // |y - F| / lambda <= C whenever |y| <= C and C >= max|F| / (lambda - 1)
    out.bound = 1.01 * fmax / (params.lambda - 1.0);
    for (double v : c.value) out.sup_abs = std::max(out.sup_abs, std::abs(v));
    out.box_excess = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kSamples; ++i) {
        const double x = params.psi_inverse(kPi * i / kSamples);
        for (double y : {-out.bound, out.bound}) {
            const double yb = (y - params.force(x)) / params.lambda;
            out.box_excess = std::max(out.box_excess, std::abs(yb) - out.bound);
        }
    }
    out.passed = out.sup_abs <= out.bound && out.box_excess <= 0.0;
    return out;
}

double oddness_residual(const GraphSeries& c, int grid) {
    std::vector<double> r(static_cast<std::size_t>(grid));
    parallel_for(r.size(), [&](std::size_t i) {
        const double x = kPi * (static_cast<double>(i) + 0.5) / grid;
        r[i] = std::abs(c(x) + c(-x));
    });
    return *std::max_element(r.begin(), r.end());
}

Vec3 HhuSystem::map(const Vec3& p) const {
    return {params.psi(p[0]), params.lambda * p[1] + params.force(p[0]), -p[2] / params.lambda};
}

Mat3 HhuSystem::jacobian(const Vec3& p) const {
    Mat3 j{};
    j[0][0] = params.psi_derivative(p[0]);
    j[1][0] = params.force_derivative(p[0]);
    j[1][1] = params.lambda;
    j[2][2] = -1.0 / params.lambda;
    return j;
}

Vec3 HhuSystem::lattice_coordinates(const Vec3& v) const { return mul(inverse(lattice), v); }

double HhuSystem::equivariance_residual(int samples, unsigned seed) const {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(-kPi, kPi), uy(-2.0, 2.0);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        const Vec3 p{ux(rng), uy(rng), uy(rng)};
        const Vec3 fp = map(p);
        for (int g = 0; g < 3; ++g) {
            const Vec3 q{p[0] + lattice[0][g], p[1] + lattice[1][g], p[2] + lattice[2][g]};
            const Vec3 fq = map(q);
            const Vec3 c = lattice_coordinates({fq[0] - fp[0], fq[1] - fp[1], fq[2] - fp[2]});
            for (double v : c) worst = std::max(worst, std::abs(v - std::round(v)));
        }
    }
    return worst;
}

Vec3 HhuSystem::fixed_point(double x_star) const { return {x_star, params.fixed_height(x_star), 0.0}; }

HhuSystem build_3d_system(const HhuParameters& params) {
    HhuSystem sys;
    sys.params = params;
    const double l = params.lambda;
    const double r5 = l + 1.0 / l;  // det of the eigenvector matrix of [[1,1],[1,0]]
    // (2pi, T, 0) with lambda T - 2pi = T when F(x + 2pi) = F(x) - 2pi; T = 0 for periodic F
    const double t = params.forcing == Forcing::Cos ? 0.0 : kTwoPi / (l - 1.0);
    sys.lattice = {{{kTwoPi, 0.0, 0.0}, {t, 1.0 / r5, 1.0 / (l * r5)}, {0.0, -1.0 / r5, l / r5}}};
    return sys;
}

Splitting nonwandering_splitting(const HhuParameters& params, double x) {
    const double m = x - kTwoPi * std::floor(x / kTwoPi);
    double xs;
    if (std::abs(m) < 1e-12 || std::abs(m - kTwoPi) < 1e-12) xs = 0.0;
    else if (std::abs(m - kPi) < 1e-12) xs = kPi;
    else throw DomainError("the non-wandering set lies over x = 0 and x = pi");
    const double a = params.psi_derivative(xs);
    const double b = params.force_derivative(xs);
    // Eigenvector of [[a,0],[b,lambda]] for a is (a - lambda, b); for lambda it is vertical.
    const Vec3 horizontal = normalized(a - params.lambda, b, 0.0);
    const Vec3 vertical{0.0, 1.0, 0.0};
    Splitting s;
    s.stable = {0.0, 0.0, 1.0};
    if (a > params.lambda) {
        s.unstable = horizontal;
        s.center = vertical;
    } else {
        s.unstable = vertical;
        s.center = horizontal;
    }
    return s;
}

ConeResult cone_check(const HhuSystem& sys, int k_max, int samples) {
    if (k_max < 1 || samples < 1) throw DomainError("cone_check needs k_max >= 1 and samples >= 1");
    ConeResult out;
    std::vector<int> ok_at(static_cast<std::size_t>(k_max) + 1, 1);
    for (double xs : {0.0, kPi}) {
        const Splitting sp = nonwandering_splitting(sys.params, xs);
        ConeTorus t;
        t.x = xs;
        std::vector<int> torus_ok(static_cast<std::size_t>(k_max) + 1, 1);
        for (int i = 0; i < samples; ++i) {
            Vec3 p{xs, -2.0 + 4.0 * i / samples, 1.0 - 2.0 * i / samples};
            Vec3 vs = sp.stable, vc = sp.center, vu = sp.unstable;
            for (int k = 1; k <= k_max; ++k) {
                const Mat3 j = sys.jacobian(p);
                vs = mul(j, vs);
                vc = mul(j, vc);
                vu = mul(j, vu);
                p = sys.map(p);
                t.s = norm(vs);
                t.c = norm(vc);
                t.u = norm(vu);
                const bool strict = t.s < t.c * (1.0 - 1e-9) && t.c < t.u * (1.0 - 1e-9);
                if (!strict) torus_ok[static_cast<std::size_t>(k)] = 0;
            }
        }
        for (int k = 1; k <= k_max; ++k) {
            if (torus_ok[static_cast<std::size_t>(k)] && t.k < 0) t.k = k;
            ok_at[static_cast<std::size_t>(k)] &= torus_ok[static_cast<std::size_t>(k)];
        }
        out.tori.push_back(t);
    }
    for (int k = 1; k <= k_max; ++k) out.passed = out.passed || ok_at[static_cast<std::size_t>(k)];
    return out;
}

CompactLeafReport compact_leaf_check(const HhuParameters& params) {
    CompactLeafReport out;
    for (double xs : {0.0, kPi}) {
        if (std::abs(params.psi(xs) - xs) > 1e-15) continue;
        out.invariant_tori.push_back(xs);
        const Splitting sp = nonwandering_splitting(params, xs);
        if (std::abs(sp.unstable[0]) < 1e-12) out.compact_leaves.push_back(xs);
    }
    const GraphSeries u(params, GraphKind::Unstable);
    const double u0 = u(0.0);
    bool increasing = true;
    for (int e = 1; e <= 6; ++e) {
        const double r = std::abs(u(kPi - std::pow(10.0, -e)) - u0);
        if (!out.leaf_range.empty() && r <= out.leaf_range.back()) increasing = false;
        out.leaf_range.push_back(r);
    }
    const HhuSystem sys = build_3d_system(params);
    out.fundamental_extent = std::abs(sys.lattice[1][1]) + std::abs(sys.lattice[1][2]);
    out.graph_leaves_unbounded = increasing && out.leaf_range.back() > 10.0 * out.fundamental_extent;
    return out;
}

std::string graph_csv(const InvariantGraph& g) {
    std::string out = "x,value,slope\n";
    char buf[96];
    for (std::size_t i = 0; i < g.x.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", g.x[i], g.value[i], g.slope[i]);
        out += buf;
    }
    return out;
}

std::string leaf_csv(const GraphSeries& u, const std::vector<double>& offsets, int grid) {
    std::string out = "b,x,y\n";
    char buf[96];
    for (double b : offsets) {
        for (int i = 0; i < grid; ++i) {
            const double x = -kPi + kTwoPi * (i + 0.5) / grid;
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", b, x, u(x) + b);
            out += buf;
        }
    }
    return out;
}

}  // namespace skewlab
