#pragma once

// Skew products f(v,z) = (Av mod 1, phi(v,z)) over a hyperbolic toral
// automorphism, with fiber maps given by finite trigonometric polynomials.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "skewlab/torus.hpp"

namespace skewlab {

class MonotoneCircleLift;

enum class Phase { Sin, Cos };

/// c * sin|cos(2 pi (base . v + fiber * z)).
struct TrigTerm {
    double coefficient = 0.0;
    std::array<std::int64_t, kMaxDim> base{};
    std::int64_t fiber = 0;
    Phase phase = Phase::Sin;

    bool operator==(const TrigTerm&) const = default;
};

inline constexpr std::size_t kMaxTerms = 32;

/// phi(v,z) = z + theta + sum(terms). A non-empty conjugator h_v(z) = z + sum(conjugator)
/// replaces phi by h_{Av} o phi_v o h_v^{-1}.
struct FiberMapFamily {
    double theta = 0.0;
    std::vector<TrigTerm> terms;
    std::vector<TrigTerm> conjugator;

    bool operator==(const FiberMapFamily&) const = default;
};

/// z + shift + sum c_k trig(2 pi (phase_k + l_k z)) on the line, for one base point.
class FiberSum {
public:
    double value(double z) const;
    double derivative(double z) const;
    double inverse(double y) const;
    bool translation() const { return n_ == 0; }
    double shift() const { return shift_; }

private:
    friend class SkewProductSystem;
    double shift_ = 0.0;
    double amplitude_ = 0.0;  // sum |c_k| over z-dependent terms
    std::size_t n_ = 0;
    std::array<double, kMaxTerms> c_{};
    std::array<double, kMaxTerms> phase_{};
    std::array<double, kMaxTerms> freq_{};
    std::array<bool, kMaxTerms> cos_{};
};

/// The fiber map over one base point, ready to evaluate.
class FiberAt {
public:
    double map(double z) const;
    double derivative(double z) const;
    double inverse(double y) const;
    /// True when the map is z + const.
    bool translation() const { return !conjugated_ && phi_.translation(); }

private:
    friend class SkewProductSystem;
    FiberSum phi_;
    bool conjugated_ = false;
    FiberSum h_;
    FiberSum h_image_;
};

/// Analytic bounds over the whole phase space.
struct FiberBounds {
    double amplitude = 0.0;       // sup |phi(v,z) - z - theta|
    double min_derivative = 1.0;  // lower bound of d phi / dz
    double max_derivative = 1.0;  // upper bound of d phi / dz
    double base_lipschitz = 0.0;  // Lipschitz constant of phi in v (Euclidean)
    double derivative_base_lipschitz = 0.0;  // Lipschitz constant of d phi/dz in v
};

enum class PhaseSpace { TorusProduct, MappingTorus };

/// Point with an exact dyadic base and a real fiber coordinate. Canonical when z is in [0,1).
struct SkewPoint {
    DyadicPoint v;
    double z = 0.0;
};

inline constexpr double kDerivativeMargin = 0.05;
inline constexpr int kValidationGrid = 256;
inline constexpr std::int64_t kMaxSteps = 100'000'000;

class SkewProductSystem {
public:
    /// Validates commutation, equivariance under the gluing, and the derivative margin.
    SkewProductSystem(ToralAutomorphism base, IntegerMatrix gluing, FiberMapFamily fiber,
                      PhaseSpace phase_space = PhaseSpace::MappingTorus);

    int dim() const { return base_.dim(); }
    const ToralAutomorphism& base() const { return base_; }
    const IntegerMatrix& gluing() const { return gluing_; }
    const FiberMapFamily& fiber() const { return fiber_; }
    PhaseSpace phase_space() const { return phase_space_; }
    const FiberBounds& bounds() const { return bounds_; }

    /// Fiber map over the base point v + displacement (displacement taken in the lift).
    FiberAt fiber_at(const DyadicPoint& v, const Vec& displacement = {}) const;
    /// Fiber map over a real base point.
    FiberAt fiber_at(const Vec& v) const;

    void forward(SkewPoint& p) const;
    void backward(SkewPoint& p) const;
    /// Bring z into [0,1), applying the gluing to the base.
    void canonicalize(SkewPoint& p) const;

    bool operator==(const SkewProductSystem& rhs) const;

private:
    void compile_sum(FiberSum& out, const std::vector<TrigTerm>& terms, const std::vector<TrigTerm>& shifted_terms,
                     bool use_shifted, double theta, const DyadicPoint* v, const Vec& disp) const;
    FiberBounds validate() const;

    ToralAutomorphism base_;
    IntegerMatrix gluing_;
    IntegerMatrix gluing_inverse_;
    FiberMapFamily fiber_;
    PhaseSpace phase_space_;
    std::vector<TrigTerm> conjugator_image_;  // conjugator terms evaluated at Av, as functions of v
    FiberBounds bounds_;
};

SkewProductSystem make_prototype(const ToralAutomorphism& a, const IntegerMatrix& b);
SkewProductSystem make_prototype(const IntegerMatrix& a, const IntegerMatrix& b);

struct Perturbation {
    enum class Kind { Rotation, FiberShear, Localized, Conjugate };
    Kind kind = Kind::Rotation;
    double theta = 0.0;
    std::vector<TrigTerm> terms;
    /// Localized only: window W(z) as terms with zero base frequency.
    std::vector<TrigTerm> window;

    static Perturbation rotation(double theta);
    static Perturbation fiber_shear(std::vector<TrigTerm> terms);
    static Perturbation localized(std::vector<TrigTerm> terms, std::vector<TrigTerm> window);
    static Perturbation conjugate(std::vector<TrigTerm> terms);
};

/// Expand (sum a) * (sum b) into a sum of trig terms.
std::vector<TrigTerm> multiply_terms(const std::vector<TrigTerm>& a, const std::vector<TrigTerm>& b);

SkewProductSystem perturb(const SkewProductSystem& sys, const Perturbation& method);

/// n-fold composition of f (n < 0 for f^{-1}).
MappingTorusPoint step(const SkewProductSystem& sys, const MappingTorusPoint& p, std::int64_t n);
SkewPoint step(const SkewProductSystem& sys, SkewPoint p, std::int64_t n);

/// The lift of f on the fiber over the base fixed point 0.
MonotoneCircleLift restrict_to_invariant_circle(const SkewProductSystem& sys, int grid = 4096);

/// Plain-text system files: [base], [gluing], [fiber], [conjugator].
SkewProductSystem parse_system(std::string_view text);
SkewProductSystem load_system(const std::string& path);
std::string print_system(const SkewProductSystem& sys);

/// Evaluate one term at base point v (real) and height z.
double eval_term(const TrigTerm& t, const Vec& v, double z, int dim);

}  // namespace skewlab
