#pragma once

// Three-case classification of a skew product (accessible, jointly integrable,
// laminated) and a numerical ergodic decomposition by Birkhoff averages.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "skewlab/circle_maps.hpp"
#include "skewlab/holonomy.hpp"
#include "skewlab/skew_system.hpp"

namespace skewlab {

enum class CaseTag { Accessible, JointlyIntegrable, Laminated };
const char* to_string(CaseTag tag);

/// Dynamics of f^n on one interval I of U.
enum class IntervalCase { Accessible, AttractorRepeller, Scaling };
const char* to_string(IntervalCase c);

struct IntervalReport {
    HeightInterval interval;
    IntervalCase sub_case = IntervalCase::Accessible;
    std::optional<double> fixed_height;  // interior fixed point of F^n
    double lambda = 1.0;                 // (F^n)' at fixed_height
    double escape_distance = 0.0;        // distance to the boundary after iterating (attractor/repeller)
};

struct ClassifyOptions {
    int depth = kDefaultDepth;
    double tol = kFixedTolerance;
    int grid = 256;
    std::int64_t rotation_iters = 1'000'000;
    double max_indeterminate_fraction = 0.10;
};

struct ClassificationReport {
    CaseTag tag = CaseTag::Accessible;
    RotationNumber rotation;  // of F, the restriction to the fiber over 0
    bool irrational_case = false;
    std::int64_t n = 1;
    std::vector<HeightInterval> k;
    std::vector<HeightInterval> u;
    std::vector<IntervalReport> intervals;
    std::vector<HeightInterval> indeterminate_bands;
    double indeterminate_fraction = 0.0;
    std::vector<double> generator_max_displacement;
    std::vector<double> heights;       // detection grid
    std::vector<double> displacement;  // max over generators of |g(z) - z| on the grid
    double min_displacement = 0.0;  // min over heights of max over generators
    double max_displacement = 0.0;
    double tail_bound = 0.0;
    double k_invariance_residual = 0.0;  // sup over K of dist(F(z), K)
    double period_residual = 0.0;        // sup |F^q(z) - z - p| over K for rational rotation
    std::optional<Semiconjugacy> semiconjugacy;  // irrational case only
    ClassifyOptions options;

    /// theta of the jointly integrable case.
    double theta() const { return rotation.value() - std::floor(rotation.value()); }
};

/// Throws InconclusiveError when indeterminate bands exceed options.max_indeterminate_fraction.
ClassificationReport classify(const SkewProductSystem& sys, const ClassifyOptions& options = {});

/// c * sin|cos(2 pi (base . v + fiber * z)), a member of the Birkhoff test family.
struct TestFunction {
    std::array<std::int64_t, kMaxDim> base{};
    std::int64_t fiber = 0;
    Phase phase = Phase::Cos;

    double operator()(const SkewPoint& p, int dim) const;
    double operator()(const Vec& v, double z, int dim) const;
    std::string name(int dim) const;
};

/// cos(2 pi x), sin(2 pi y), cos(2 pi (x+y)), cos(2 pi z), sin(2 pi z), cos(2 pi (x+z)).
std::vector<TestFunction> default_test_functions(int dim);
/// All trigonometric monomials with frequencies |j_i| <= max_freq, one per +-pair.
std::vector<TestFunction> trig_test_family(int dim, int max_freq);

enum class Direction { Forward, Backward };

/// (1/n) sum_{k=1..n} phi(f^{+-k period}(start)).
double birkhoff_average(const SkewProductSystem& sys, const TestFunction& phi, SkewPoint start, std::int64_t n,
                        Direction direction = Direction::Forward, std::int64_t period = 1);

struct BirkhoffStats {
    std::vector<double> mean;
    std::vector<double> std_error;  // batch-means estimate
};

inline constexpr int kBatches = 32;

BirkhoffStats birkhoff_stats(const SkewProductSystem& sys, const std::vector<TestFunction>& tests, SkewPoint start,
                             std::int64_t n, Direction direction = Direction::Forward, std::int64_t period = 1);

struct ComponentStats {
    std::string label;
    HeightInterval support;
    bool is_interval = false;
    std::vector<double> mean;        // across orbits
    std::vector<double> dispersion;  // std across orbits
    std::vector<double> band;        // CLT standard error of a single orbit mean (RMS over orbits)
    std::vector<double> integral;    // direct quadrature over the component
    bool ergodic_signature = false;  // dispersion <= 3 band for every test
};

struct DecompositionReport {
    std::int64_t n = 1;
    std::vector<TestFunction> tests;
    std::vector<ComponentStats> components;
    std::int64_t n_orbits = 0;
    std::int64_t n_iters = 0;
    std::uint64_t seed = 0;
};

struct DecomposeOptions {
    std::int64_t n_orbits = 10;
    std::int64_t n_iters = 100'000;
    std::uint64_t seed = 1;
    int quadrature = 12;  // per base coordinate, for component integrals
    Direction direction = Direction::Forward;
};

DecompositionReport decompose(const SkewProductSystem& sys, const ClassificationReport& report,
                              const std::vector<TestFunction>& tests, const DecomposeOptions& options = {});

/// Uniform random point on the dyadic torus with a height drawn from [lo, hi).
SkewPoint random_point(std::uint64_t seed, std::uint64_t stream, int dim, double lo = 0.0, double hi = 1.0);

struct Projection {
    std::vector<double> heights;  // z_i = i/G, i = 0..G
    std::vector<double> p;        // p(z_i), p(0) = 0, p(1) = 1
    std::vector<double> lamination_points;  // p at point classes of K
    double total_mass = 1.0;      // nu[0,1) before normalization
    int quadrature = 0;
    double tail_bound = 0.0;

    double operator()(double z) const;
};

/// p(z) = nu[0,z)/nu[0,1) with nu[0,z) = int (h_{0->v}(z) - h_{0->v}(0)) dv (midpoint rule, offset `shift`).
Projection build_projection(const SkewProductSystem& sys, const ClassificationReport& report, int grid = 256,
                            int quadrature = 12, double shift = 0.5, int depth = kDefaultDepth);

}  // namespace skewlab
