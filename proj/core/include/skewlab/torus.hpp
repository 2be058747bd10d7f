#pragma once

// Integer-matrix toral automorphisms, their invariant splittings, and
// coordinates on T^d and on the mapping torus M_B = T^d x R / (v,t)~(Bv,t-1).

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace skewlab {

inline constexpr int kMaxDim = 3;

/// Real vector with room for the largest supported base dimension; only the
/// first `dim` entries are meaningful.
using Vec = std::array<double, kMaxDim>;

class IntegerMatrix {
public:
    IntegerMatrix() = default;
    explicit IntegerMatrix(int dim);

    static IntegerMatrix identity(int dim);
    static IntegerMatrix from_rows(const std::vector<std::vector<std::int64_t>>& rows);

    int dim() const { return dim_; }
    std::int64_t operator()(int i, int j) const { return a_[static_cast<std::size_t>(i * kMaxDim + j)]; }
    std::int64_t& operator()(int i, int j) { return a_[static_cast<std::size_t>(i * kMaxDim + j)]; }

    std::int64_t determinant() const;
    std::int64_t trace() const;
    bool is_unimodular() const;
    bool is_identity() const;

    /// Integer inverse; requires |det| = 1.
    IntegerMatrix inverse() const;

    IntegerMatrix operator*(const IntegerMatrix& rhs) const;
    IntegerMatrix operator-(const IntegerMatrix& rhs) const;
    bool operator==(const IntegerMatrix& rhs) const = default;

    Vec apply(const Vec& v) const;
    /// Row-vector product j·M, used for frequency vectors.
    std::array<std::int64_t, kMaxDim> apply_left(const std::array<std::int64_t, kMaxDim>& j) const;

    /// Max absolute row sum (induced infinity norm) as a Lipschitz bound.
    double norm_inf() const;
    /// Frobenius norm; bounds the Euclidean operator norm.
    double norm_frobenius() const;

    /// Rows as comma-separated integers, one row per line.
    std::string to_rows() const;

private:
    int dim_ = 0;
    std::array<std::int64_t, kMaxDim * kMaxDim> a_{};
};

/// Parse rows of comma-separated integers. Rows are separated by newlines or ';'.
IntegerMatrix parse_matrix(std::string_view text);

/// All d eigenvalues (real ones exact to rounding, complex pairs via deflation).
std::vector<std::complex<double>> eigenvalues(const IntegerMatrix& m);

inline constexpr double kHyperbolicityTolerance = 1e-8;

/// True iff no eigenvalue modulus lies within `tol` of 1. Throws DomainError
/// for non-unimodular input.
bool check_hyperbolic(const IntegerMatrix& m, double tol = kHyperbolicityTolerance);

/// True iff a·b = b·a over the integers. Throws DomainError on dimension mismatch.
bool check_commuting(const IntegerMatrix& a, const IntegerMatrix& b);

struct InvariantDirection {
    Vec vector{};            // unit Euclidean norm
    double eigenvalue = 0.0; // signed
    double rate() const { return eigenvalue < 0 ? -eigenvalue : eigenvalue; }
};

/// Hyperbolic automorphism with its eigen-splitting. Immutable.
class ToralAutomorphism {
public:
    /// Equivalent to compute_splitting(m).
    explicit ToralAutomorphism(const IntegerMatrix& m);

    int dim() const { return matrix_.dim(); }
    const IntegerMatrix& matrix() const { return matrix_; }
    const IntegerMatrix& inverse() const { return inverse_; }

    /// Sorted by decreasing rate.
    const std::vector<InvariantDirection>& unstable() const { return unstable_; }
    /// Sorted by increasing rate.
    const std::vector<InvariantDirection>& stable() const { return stable_; }

    std::vector<double> unstable_rates() const;
    std::vector<double> stable_rates() const;

    /// Weakest contraction among stable directions (closest to 1 from below).
    double max_stable_rate() const;
    /// Weakest expansion among unstable directions.
    double min_unstable_rate() const;

    struct Coordinates {
        std::vector<double> unstable;
        std::vector<double> stable;
    };
    /// Expand a vector of R^d in the eigenbasis.
    Coordinates coordinates(const Vec& v) const;

    /// Largest residual |M e - eigenvalue e| over the basis.
    double splitting_residual() const;

private:
    IntegerMatrix matrix_;
    IntegerMatrix inverse_;
    std::vector<InvariantDirection> unstable_;
    std::vector<InvariantDirection> stable_;
    std::array<double, kMaxDim * kMaxDim> basis_inverse_{};
};

ToralAutomorphism compute_splitting(const IntegerMatrix& m);

/// Reduce a real coordinate to [0,1).
double wrap_unit(double x);
/// Signed distance from x to the nearest integer, in [-1/2, 1/2].
double circle_offset(double x);

struct TorusPoint {
    int dim = 2;
    Vec coords{};

    TorusPoint canonical() const;
};

struct MappingTorusPoint {
    TorusPoint base;
    double height = 0.0;

    /// Representative with height in [0,1) under (v,t) ~ (Bv, t-1).
    MappingTorusPoint canonical(const IntegerMatrix& gluing) const;
};

/// Point of T^d on the dyadic grid 2^-64 Z^d / Z^d. Integer-matrix maps act
/// exactly (uint64 wraparound is reduction mod 1), so forward and backward
/// orbits are bit-exact inverses of each other.
struct DyadicPoint {
    std::array<std::uint64_t, kMaxDim> x{};

    static DyadicPoint from_real(const Vec& v, int dim);
    /// Coordinates in [0,1), truncated to 53 bits.
    Vec to_real(int dim) const;
    static double unit(std::uint64_t x) { return static_cast<double>(x >> 11) * 0x1p-53; }
};

DyadicPoint apply(const IntegerMatrix& m, const DyadicPoint& p);

/// j·v mod 1 computed exactly on the dyadic grid, returned in [0,1).
double dyadic_phase(const std::array<std::int64_t, kMaxDim>& j, const DyadicPoint& p, int dim);

}  // namespace skewlab
