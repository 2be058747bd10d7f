#pragma once

// Degree-one monotone circle maps: rotation numbers with rational snapping,
// invariant measures, and semiconjugacies to rigid rotations.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace skewlab {

/// Lift F of a circle homeomorphism sampled at x = i/G, i = 0..G-1, extended by
/// F(x+1) = F(x) + 1 and interpolated with periodic monotone (Fritsch-Butland) cubics.
class MonotoneCircleLift {
public:
    static constexpr int kDefaultGrid = 4096;

    /// Throws ValidationError unless samples are strictly increasing with total increase below 1.
    explicit MonotoneCircleLift(std::vector<double> samples);

    template <class Fn>
    static MonotoneCircleLift from_function(Fn&& f, int grid = kDefaultGrid) {
        std::vector<double> s(static_cast<std::size_t>(grid));
        for (int i = 0; i < grid; ++i) s[static_cast<std::size_t>(i)] = f(static_cast<double>(i) / grid);
        return MonotoneCircleLift(std::move(s));
    }
    static MonotoneCircleLift rotation(double r, int grid = kDefaultGrid);
    static MonotoneCircleLift identity(int grid = kDefaultGrid) { return rotation(0.0, grid); }

    int grid() const { return static_cast<int>(y_.size()); }
    const std::vector<double>& samples() const { return y_; }

    double operator()(double x) const;
    double derivative(double x) const;
    double inverse(double y) const;

    /// (*this) o inner, resampled on this grid.
    MonotoneCircleLift compose(const MonotoneCircleLift& inner) const;
    MonotoneCircleLift inverse_lift() const;

    /// Largest |F(x) - x| over the grid.
    double max_displacement() const;

private:
    std::vector<double> y_;
    std::vector<double> d_;
};

using CircleFn = std::function<double(double)>;

struct RotationNumber {
    double rho = 0.0;          // (F^n(x0) - x0) / n
    double error_bound = 0.0;  // 1/n
    bool rational = false;
    std::int64_t p = 0;
    std::int64_t q = 1;
    double periodic_point = 0.0;  // verified F^q(x) = x + p when rational

    /// p/q after a snap, rho otherwise.
    double value() const { return rational ? static_cast<double>(p) / static_cast<double>(q) : rho; }
};

inline constexpr std::int64_t kMaxSnapDenominator = 1000;

/// Throws DomainError when n_iter < 1000.
RotationNumber rotation_number(const CircleFn& lift, std::int64_t n_iter = 1'000'000);
RotationNumber rotation_number(const MonotoneCircleLift& lift, std::int64_t n_iter = 1'000'000);

/// Best rational p/q (q <= max_q) with a verified q-periodic point, if any.
std::optional<RotationNumber> snap_rational(const CircleFn& lift, double rho, double error_bound,
                                            std::int64_t max_q = kMaxSnapDenominator);

/// Continued-fraction convergents p/q of x with q <= max_q.
std::vector<std::pair<std::int64_t, std::int64_t>> convergents(double x, std::int64_t max_q);

/// Probability measure on the circle: either equal atoms or a sampled cdf.
struct CircleMeasure {
    std::vector<double> cdf;    // cdf[i] = mu[0, i/G), size G+1; linear between samples
    std::vector<double> atoms;  // sorted positions in [0,1), each of mass 1/atoms.size()

    bool atomic() const { return !atoms.empty(); }
    /// mu[0,x) for x in [0,1], extended to R as floor(x) + mu[0, frac x).
    double operator()(double x) const;
};

CircleMeasure invariant_measure(const MonotoneCircleLift& lift, std::int64_t n_samples = 1'000'000, int grid = 4096);
CircleMeasure invariant_measure(const CircleFn& lift, std::int64_t n_samples = 1'000'000, int grid = 4096);

/// sup over a grid of |mu(F^{-1}[0,x)) - mu[0,x)|.
double invariance_residual(const MonotoneCircleLift& lift, const CircleMeasure& mu, int grid = 1000);

/// Nondecreasing degree-one map sampled at i/G, linear in between.
struct SampledCircleMap {
    std::vector<double> values;
    double operator()(double x) const;
};

struct Semiconjugacy {
    SampledCircleMap p;
    RotationNumber rotation;
    double defect = 0.0;  // sup |P(F x) - P(x) - rho| mod 1 over the grid
};

/// P(x) = mu[0,x). Throws DomainError for rational rotation numbers.
Semiconjugacy semiconjugacy_to_rotation(const MonotoneCircleLift& lift, std::int64_t n_iter = 1'000'000,
                                        int grid = 4096);

/// Two-column CSV `x,value` with 17 significant digits.
std::string csv_table(const std::vector<double>& x, const std::vector<double>& value);
std::string lift_csv(const MonotoneCircleLift& lift);
std::string measure_csv(const CircleMeasure& mu);
std::string map_csv(const SampledCircleMap& map);

/// F(x) = x + rotation + sum c sin|cos(2 pi k x), read from `rotation r` and `coeff sin|cos k c` lines.
struct TrigCircleMap {
    struct Term {
        bool cosine = false;
        int k = 1;
        double c = 0.0;
    };
    double rotation = 0.0;
    std::vector<Term> terms;

    double operator()(double x) const;
    double derivative(double x) const;
    /// Throws ValidationError unless F' > 0 (sufficient bound 1 - sum 2 pi k |c| > 0, else a scan).
    void validate() const;
};

TrigCircleMap parse_circle_map(std::string_view text);
TrigCircleMap load_circle_map(const std::string& path);

}  // namespace skewlab
