#pragma once

// The dynamically incoherent example on T^3: invariant graphs of
// g(x,y) = (x + 2/3 sin x, lambda y + F(x)), the 3D map, and a cone check on
// the non-wandering tori.

#include <array>
#include <string>
#include <vector>

namespace skewlab {

enum class Forcing { Cos, SinMinusX };

/// Accepts "cos" and "odd" (or "sin_x_minus_x").
Forcing parse_forcing(const std::string& name);
const char* to_string(Forcing f);

struct HhuParameters {
    double lambda = 1.6180339887498949;  // (1 + sqrt 5) / 2
    Forcing forcing = Forcing::Cos;

    double psi(double x) const;
    double psi_derivative(double x) const;
    /// Inverse of psi on R (psi is a strictly increasing bijection).
    double psi_inverse(double x) const;
    double force(double x) const;
    double force_derivative(double x) const;
    /// Fixed value y* = F(x*) / (1 - lambda) over a fixed point x* of psi.
    double fixed_height(double x_star) const;
};

enum class GraphKind { Unstable, Stable };

/// u: graph through the expanding point over x = 0 on (-pi, pi).
/// c: graph through the saddle over x = +-pi on (0, pi] and [-pi, 0).
class GraphSeries {
public:
    GraphSeries(HhuParameters params, GraphKind kind, int depth = 400);

    double operator()(double x) const;
    double derivative(double x) const;
    /// Bound on the dropped series terms at x; throws NumericalError when not below 1e-12.
    double tail(double x) const;
    GraphKind kind() const { return kind_; }
    const HhuParameters& params() const { return params_; }

private:
    struct Eval {
        double value = 0.0;
        double derivative = 0.0;
        double tail = 0.0;
    };
    Eval eval(double x) const;

    HhuParameters params_;
    GraphKind kind_;
    int depth_;
};

struct InvariantGraph {
    GraphKind kind = GraphKind::Unstable;
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> x;
    std::vector<double> value;
    std::vector<double> slope;
    double residual = 0.0;  // max |G(psi x) - lambda G(x) - F(x)| over the grid
    double tail = 0.0;      // max series tail over the grid
};

/// Midpoint grid on (-pi, pi).
InvariantGraph build_unstable_graph(const HhuParameters& params, int grid = 2000, int depth = 400);
/// Midpoint grid on (0, pi).
InvariantGraph build_stable_graph(const HhuParameters& params, int grid = 2000, int depth = 400);

/// Central finite-difference slopes at x0 with steps h, h/2, ... (refinements + 1 values).
std::vector<double> refined_slopes(const GraphSeries& g, double x0, double h, int refinements = 1);

struct BoundednessCheck {
    double bound = 0.0;    // C with g^{-1}([-C,C] x [0,pi]) inside the box
    double sup_abs = 0.0;  // sup |c| over the grid
    double box_excess = 0.0;  // largest |y| - C of g^{-1} over the box boundary (<= 0 when invariant)
    bool passed = false;
};
BoundednessCheck stable_graph_bound(const HhuParameters& params, const InvariantGraph& c);

/// max |c(x) + c(-x)| over (0, pi) on the grid.
double oddness_residual(const GraphSeries& c, int grid = 2000);

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

/// f(x,y,z) = (psi x, lambda y + F(x), -z/lambda) on R^3 and its quotient lattice.
struct HhuSystem {
    HhuParameters params;
    /// Columns generate the lattice: (2pi, T, 0) and {0} x Lambda.
    Mat3 lattice{};

    Vec3 map(const Vec3& p) const;
    Mat3 jacobian(const Vec3& p) const;
    /// Coordinates of v in the lattice basis.
    Vec3 lattice_coordinates(const Vec3& v) const;
    /// max over samples and generators l of dist(f(p + l) - f(p), lattice) in lattice coordinates.
    double equivariance_residual(int samples = 100, unsigned seed = 1) const;
    /// Fixed point over the psi-fixed point x* in {0, pi}.
    Vec3 fixed_point(double x_star) const;
};

HhuSystem build_3d_system(const HhuParameters& params);

struct Splitting {
    Vec3 unstable{};
    Vec3 center{};
    Vec3 stable{};
};

/// E^u, E^c, E^s at a point with x in {0, pi} mod 2pi: horizontal and vertical limits of the
/// graph families, with the non-vertical direction the eigenvector of Dg at the fixed point.
Splitting nonwandering_splitting(const HhuParameters& params, double x);

struct ConeTorus {
    double x = 0.0;
    int k = -1;  // smallest k <= k_max with strict domination, -1 if none
    double s = 0.0, c = 0.0, u = 0.0;  // |Df^k v| at the last k tried
};

struct ConeResult {
    bool passed = false;
    std::vector<ConeTorus> tori;
};

/// Strict |Df^k v^s| < |Df^k v^c| < |Df^k v^u| at sampled points of both tori x = 0 and x = pi
/// for some common k <= k_max. Passes only if every torus succeeds.
ConeResult cone_check(const HhuSystem& sys, int k_max = 20, int samples = 8);

struct CompactLeafReport {
    std::vector<double> invariant_tori;  // x-values in [0, 2pi) fixed by psi
    std::vector<double> compact_leaves;  // those tangent to E^u + E^s
    std::vector<double> leaf_range;      // |u(pi - delta) - u(0)| for delta = 10^-1 .. 10^-6
    double fundamental_extent = 0.0;     // y-extent of a fundamental domain of the lattice
    bool graph_leaves_unbounded = false;
};

CompactLeafReport compact_leaf_check(const HhuParameters& params);

/// CSV `x,u,u_slope` / `x,c,c_slope`.
std::string graph_csv(const InvariantGraph& g);
/// CSV `b,x,y`: leaves x -> u(x) + b for the given offsets.
std::string leaf_csv(const GraphSeries& u, const std::vector<double>& offsets, int grid = 200);

}  // namespace skewlab
