#pragma once

// Order-preserving actions on closed subsets of the line: invariant measures,
// translation numbers, conjugation scaling and the semiconjugacy P with
// P g = P + tau(g), P f = lambda P. Supported class: abelian groups that are
// chart conjugates of translation groups, on R or on a discrete orbit.

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skewlab/torus.hpp"

namespace skewlab {

enum class ChartKind { Identity, Cube, SinBump };

/// Order-preserving homeomorphism h of R; generators act as h o (a t + b) o h^{-1}.
struct Chart {
    ChartKind kind = ChartKind::Identity;
    double amplitude = 0.0;  // sinbump: h(t) = t + amplitude * sin(t) * bump(t / radius)
    double radius = 1.0;

    double operator()(double t) const;
    double derivative(double t) const;
    double inverse(double x) const;
    /// Throws ValidationError unless h' > 0 on a scan of the bump support.
    void validate() const;
};

/// t -> a t + b in chart coordinates.
struct AffineMap {
    double a = 1.0;
    double b = 0.0;
};

enum class GammaKind { Real, Orbit };

struct LineAction {
    GammaKind gamma = GammaKind::Real;
    std::vector<double> seeds;  // orbit case: Gamma = G-orbits of h(seeds)
    Chart chart;
    std::vector<AffineMap> generators;
    AffineMap conjugator;  // f = h o (a t + c) o h^{-1}; identity unless given

    std::size_t size() const { return generators.size(); }
    double generator(std::size_t i, double x) const;
    double generator_inverse(std::size_t i, double x) const;
    double f(double x) const;
    double f_inverse(double x) const;
    /// F(g_i) = f g_i f^{-1}.
    double conjugated(std::size_t i, double x) const;
    /// Letters +-(i+1) applied right to left.
    double word(const std::vector<int>& letters, double x) const;
};

/// Counting or chart-Lebesgue measure on Gamma.
struct LineMeasure {
    bool atomic = false;
    Chart chart;
    std::vector<double> seeds;
    double spacing = 0.0;  // orbit spacing in chart coordinates
    double invariance_residual = 0.0;

    /// Signed mu[x, y): negative when y < x.
    double mass(double x, double y) const;
};

/// Throws UnsupportedError for non-translation generators or non-closed orbits, ValidationError
/// if the measure fails invariance on 100 random intervals to 1e-10.
LineMeasure invariant_measure(const LineAction& action);

struct TranslationData {
    std::vector<double> tau;  // per generator
    double base_point_spread = 0.0;  // max variation of tau over 10 base points
};

/// Throws DomainError if the generators share a fixed point on a scan.
TranslationData translation_number(const LineAction& action, const LineMeasure& mu);
/// tau of a word from base point x.
double tau_word(const LineAction& action, const LineMeasure& mu, const std::vector<int>& letters, double x = 0.0);

/// lambda = tau(F g)/tau(g); throws DomainError when the ratios disagree beyond 1e-10.
double conjugation_scaling(const LineAction& action, const LineMeasure& mu, const TranslationData& tau);

struct MasterSemiconjugacy {
    LineMeasure mu;
    TranslationData tau;
    double lambda = 1.0;
    double base = 0.0;    // P(x) = mu[base, x) - offset
    double offset = 0.0;
    double zero_lo = 0.0;  // P^{-1}(0) = [zero_lo, zero_hi]
    double zero_hi = 0.0;
    double fixed_point = 0.0;
    std::vector<double> x;  // sample grid
    std::vector<double> p;
    double residual_g = 0.0;  // max |P(g x) - P(x) - tau(g)| on the grid
    double residual_f = 0.0;  // max |P(f x) - lambda P(x)| on the grid

    double operator()(double x) const;
};

/// Throws DomainError when lambda = 1 within 1e-9.
MasterSemiconjugacy master_semiconjugacy(const LineAction& action, int grid = 1000, double half_width = 5.0);

/// A fixed point of h inside P^{-1}(0); throws DomainError if h does not commute with f on samples.
std::optional<double> commuting_fixed_point(const LineAction& action, const MasterSemiconjugacy& p,
                                            const std::function<double(double)>& h);

/// g -> (M - I) g on Z^d: injective iff det(M - I) != 0, bijective iff |det(M - I)| = 1.
struct FixedCosetReport {
    std::int64_t det = 0;
    bool injective = false;
    bool bijective = false;
    int missing_unit = -1;        // some e_i outside the image, -1 when none
    std::int64_t box_collisions = 0;  // equal images among g in [-R, R]^d
};
FixedCosetReport fixed_coset_check(const IntegerMatrix& m, int radius = 3);

/// Instance files: `gamma real|orbit s...`, `chart identity|cube|sinbump a R`,
/// `generator a b`, `conjugator a c`, with # comments.
LineAction parse_action(std::string_view text);
LineAction load_action(const std::string& path);

/// CSV `x,P`.
std::string semiconjugacy_csv(const MasterSemiconjugacy& p);

}  // namespace skewlab
