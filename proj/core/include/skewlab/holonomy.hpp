#pragma once

// Stable and unstable holonomies between center fibers, su-loop maps on the
// fiber over the base origin, holonomy derivatives, and detection of heights
// fixed by every su-loop (compact us-leaves).

#include <memory>
#include <string>
#include <vector>

#include "skewlab/circle_maps.hpp"
#include "skewlab/skew_system.hpp"

namespace skewlab {

enum class LeafKind { Stable, Unstable };

inline constexpr int kDefaultDepth = 80;
/// Root-finding tolerance charged per fiber inverse in the rounding estimate.
inline constexpr double kInverseTolerance = 1e-13;

/// anchor + offset * e, with e the `direction`-th basis vector of the leaf's bundle.
struct BaseLeafPoint {
    TorusPoint anchor;
    int direction = 0;
    double offset = 0.0;

    Vec lifted(const ToralAutomorphism& a, LeafKind kind) const;
};

/// Fiber transport along the straight segment from `start` to start + displacement,
/// where the displacement lies in E^s (stable) or E^u (unstable). Segments longer than 1
/// are composed from equal pieces of length <= 1.
class LeafTransport {
public:
    LeafTransport(const SkewProductSystem& sys, LeafKind kind, const Vec& start, const Vec& displacement,
                  int depth = kDefaultDepth);

    LeafKind kind() const { return kind_; }
    int depth() const { return depth_; }
    double operator()(double z) const;
    /// Exact derivative of the truncated transport (the finite product J).
    double derivative(double z) const;
    /// Truncation bound from the base rates plus an a-posteriori rounding estimate.
    double tail_bound() const { return tail_bound_; }
    double truncation_bound() const { return truncation_bound_; }

private:
    struct Chunk {
        std::vector<FiberAt> from;
        std::vector<FiberAt> to;
        double truncation = 0.0;
    };
    double eval_chunk(const Chunk& c, double z, double* jacobian, double* rounding) const;

    LeafKind kind_;
    int depth_;
    std::vector<Chunk> chunks_;
    double truncation_bound_ = 0.0;
    double tail_bound_ = 0.0;
};

struct HolonomyMap {
    LeafKind kind = LeafKind::Stable;
    BaseLeafPoint from;
    BaseLeafPoint to;
    MonotoneCircleLift transport = MonotoneCircleLift::identity(16);
    int truncation_depth = kDefaultDepth;
    double tail_bound = 0.0;
    /// Pointwise evaluator behind `transport`.
    std::shared_ptr<const LeafTransport> exact;

    double operator()(double z) const { return (*exact)(z); }
    bool certified() const { return tail_bound < 1e-9; }
};

/// Throws DomainError unless `to` lies on the stable (unstable) leaf of `from` within 1e-10.
HolonomyMap stable_holonomy(const SkewProductSystem& sys, const BaseLeafPoint& from, const BaseLeafPoint& to,
                            int depth = kDefaultDepth, int grid = MonotoneCircleLift::kDefaultGrid);
HolonomyMap unstable_holonomy(const SkewProductSystem& sys, const BaseLeafPoint& from, const BaseLeafPoint& to,
                              int depth = kDefaultDepth, int grid = MonotoneCircleLift::kDefaultGrid);

/// Lifted displacement from `from` to a point of its leaf congruent to `to` mod Z^d.
Vec leaf_displacement(const ToralAutomorphism& a, LeafKind kind, const Vec& from, const Vec& to);

struct SuLeg {
    LeafKind kind = LeafKind::Stable;
    Vec displacement{};
};

/// Legs starting at the lattice point alpha = -(sum of displacements) and ending at 0.
struct SuLoop {
    std::vector<SuLeg> legs;

    /// Sum of leg displacements rounded to Z^d; throws DomainError if it is not integral within 1e-10.
    std::array<std::int64_t, kMaxDim> closing_vector(int dim) const;
};

/// Stable leg then unstable leg from e_i to 0 (closed-form global product structure).
SuLoop generator_loop(const ToralAutomorphism& a, int i);
std::vector<SuLoop> generator_loops(const ToralAutomorphism& a);

/// Pointwise g_alpha on the fiber over the base origin.
class SuLoopMap {
public:
    SuLoopMap(const SkewProductSystem& sys, const SuLoop& loop, int depth = kDefaultDepth);
    double operator()(double z) const;
    double derivative(double z) const;
    double tail_bound() const { return tail_bound_; }

private:
    std::vector<LeafTransport> legs_;
    double tail_bound_ = 0.0;
};

MonotoneCircleLift su_loop_map(const SkewProductSystem& sys, const SuLoop& loop, int depth = kDefaultDepth,
                               int grid = MonotoneCircleLift::kDefaultGrid);

/// J for the transport at height z (product of fiber-derivative ratios along the orbits).
double holonomy_derivative(const SkewProductSystem& sys, LeafKind kind, const Vec& from, const Vec& displacement,
                           double z, int depth = kDefaultDepth);

/// The generator lifts followed by the circle restriction F.
std::vector<MonotoneCircleLift> accessibility_group(const SkewProductSystem& sys, const std::vector<SuLoop>& generators,
                                                    int depth = kDefaultDepth,
                                                    int grid = MonotoneCircleLift::kDefaultGrid);

/// Closed height set [lo, hi] on the circle; lo in [0,1), hi >= lo (hi > 1 wraps through 0).
struct HeightInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool point() const { return hi == lo; }
    double length() const { return hi - lo; }
    bool contains(double z, double slack = 0.0) const;
};

struct CompactClasses {
    std::vector<HeightInterval> fixed;          // the detected K
    std::vector<HeightInterval> indeterminate;  // displacement in [tol, 10 tol]
    std::vector<double> heights;
    std::vector<double> displacement;  // max over generators of |g(z) - z|
    std::vector<double> generator_max;  // per generator, max over heights of |g(z) - z|
    double min_displacement = 0.0;
    double max_displacement = 0.0;
    double indeterminate_fraction = 0.0;
    double tol = 0.0;
    double tail_bound = 0.0;  // largest generator tail bound

    bool empty() const { return fixed.empty(); }
    bool full_circle() const;
    bool contains(double z, double slack = 1e-9) const;
    /// Open complement intervals (the set U).
    std::vector<HeightInterval> complement() const;
};

inline constexpr double kFixedTolerance = 1e-6;

CompactClasses detect_compact_classes(const SkewProductSystem& sys, const std::vector<SuLoop>& generators,
                                      int grid = 256, double tol = kFixedTolerance, int depth = kDefaultDepth);

/// max over generators of |g(z) - z| at one height.
double su_displacement(const std::vector<SuLoopMap>& maps, double z);

/// CSV `x,value` of the displacement function.
std::string displacement_csv(const CompactClasses& k);

/// h_{0 -> v}: transport from the origin fiber to the fiber over v along an unstable
/// segment then a stable segment (v taken as its representative in [0,1)^d).
class OriginTransport {
public:
    OriginTransport(const SkewProductSystem& sys, const Vec& v, int depth = kDefaultDepth);
    double operator()(double z) const;
    double tail_bound() const;

private:
    std::vector<LeafTransport> legs_;
};

}  // namespace skewlab
