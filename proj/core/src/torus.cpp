#include "skewlab/torus.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "skewlab/error.hpp"

namespace skewlab {

namespace {

void require_dim(int dim) {
    if (dim < 2 || dim > kMaxDim) {
        throw DomainError("matrix dimension must be 2 or 3, got " + std::to_string(dim));
    }
}

// Characteristic polynomial coefficients: lambda^d + c[d-1] lambda^{d-1} + ... + c[0].
std::vector<double> char_poly(const IntegerMatrix& m) {
    const auto t = static_cast<double>(m.trace());
    const auto det = static_cast<double>(m.determinant());
    if (m.dim() == 2) return {det, -t};
    double c2 = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            c2 += static_cast<double>(m(i, i) * m(j, j) - m(i, j) * m(j, i));
        }
    }
    return {-det, c2, -t};
}

double eval_poly(const std::vector<double>& c, double x, double* deriv) {
    // monic of degree c.size()
    double p = 1.0;
    double dp = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
        dp = dp * x + p;
        p = p * x + *it;
    }
    if (deriv) *deriv = dp;
    return p;
}

double polish_root(const std::vector<double>& c, double x) {
    for (int it = 0; it < 8; ++it) {
        double d = 0.0;
        const double p = eval_poly(c, x, &d);
        if (d == 0.0) break;
        const double step = p / d;
        x -= step;
        if (std::abs(step) <= 1e-17 * std::max(1.0, std::abs(x))) break;
    }
    return x;
}

// A real root of a monic cubic by bisection on a Cauchy bracket, then Newton.
double cubic_real_root(const std::vector<double>& c) {
    double bound = 1.0;
    for (double ci : c) bound = std::max(bound, 1.0 + std::abs(ci));
    double lo = -bound;
    double hi = bound;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * bound; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (eval_poly(c, mid, nullptr) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return polish_root(c, 0.5 * (lo + hi));
}

// Roots of x^2 + b x + c.
std::pair<std::complex<double>, std::complex<double>> quadratic_roots(double b, double c) {
    const double disc = b * b - 4.0 * c;
    if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        const double q = -0.5 * (b + (b >= 0.0 ? s : -s));
        if (q == 0.0) return {0.0, 0.0};
        return {q, c / q};
    }
    const double re = -0.5 * b;
    const double im = 0.5 * std::sqrt(-disc);
    return {{re, im}, {re, -im}};
}

Vec null_vector(const IntegerMatrix& m, double lambda) {
    const int d = m.dim();
    std::array<Vec, kMaxDim> rows{};
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) rows[i][j] = static_cast<double>(m(i, j)) - (i == j ? lambda : 0.0);
    }
    Vec best{};
    double best_norm = -1.0;
    if (d == 2) {
        for (int i = 0; i < 2; ++i) {
            const Vec v{-rows[i][1], rows[i][0], 0.0};
            const double n = std::hypot(v[0], v[1]);
            if (n > best_norm) {
                best_norm = n;
                best = v;
            }
        }
    } else {
        for (int i = 0; i < 3; ++i) {
            for (int j = i + 1; j < 3; ++j) {
                const Vec& a = rows[i];
                const Vec& b = rows[j];
                const Vec v{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
                const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
                if (n > best_norm) {
                    best_norm = n;
                    best = v;
                }
            }
        }
    }
    if (!(best_norm > 0.0)) throw NumericalError("degenerate eigenvector computation");
    int pivot = 0;
    for (int i = 1; i < d; ++i) {
        if (std::abs(best[i]) > std::abs(best[pivot])) pivot = i;
    }
    const double scale = (best[pivot] < 0 ? -1.0 : 1.0) / best_norm;
    for (int i = 0; i < d; ++i) best[i] *= scale;
    return best;
}

bool invert_small(const std::array<double, kMaxDim * kMaxDim>& a, int d, std::array<double, kMaxDim * kMaxDim>& out) {
    auto at = [&](int i, int j) { return a[static_cast<std::size_t>(i * kMaxDim + j)]; };
    auto set = [&](int i, int j, double v) { out[static_cast<std::size_t>(i * kMaxDim + j)] = v; };
    if (d == 2) {
        const double det = at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0);
        if (det == 0.0) return false;
        set(0, 0, at(1, 1) / det);
        set(0, 1, -at(0, 1) / det);
        set(1, 0, -at(1, 0) / det);
        set(1, 1, at(0, 0) / det);
        return true;
    }
    const double c00 = at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1);
    const double c01 = at(1, 2) * at(2, 0) - at(1, 0) * at(2, 2);
    const double c02 = at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0);
    const double det = at(0, 0) * c00 + at(0, 1) * c01 + at(0, 2) * c02;
    if (det == 0.0) return false;
    set(0, 0, c00 / det);
    set(1, 0, c01 / det);
    set(2, 0, c02 / det);
    set(0, 1, (at(0, 2) * at(2, 1) - at(0, 1) * at(2, 2)) / det);
    set(1, 1, (at(0, 0) * at(2, 2) - at(0, 2) * at(2, 0)) / det);
    set(2, 1, (at(0, 1) * at(2, 0) - at(0, 0) * at(2, 1)) / det);
    set(0, 2, (at(0, 1) * at(1, 2) - at(0, 2) * at(1, 1)) / det);
    set(1, 2, (at(0, 2) * at(1, 0) - at(0, 0) * at(1, 2)) / det);
    set(2, 2, (at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0)) / det);
    return true;
}

}  // namespace

IntegerMatrix::IntegerMatrix(int dim) : dim_(dim) { require_dim(dim); }

IntegerMatrix IntegerMatrix::identity(int dim) {
    IntegerMatrix m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = 1;
    return m;
}

IntegerMatrix IntegerMatrix::from_rows(const std::vector<std::vector<std::int64_t>>& rows) {
    const int d = static_cast<int>(rows.size());
    require_dim(d);
    IntegerMatrix m(d);
    for (int i = 0; i < d; ++i) {
        if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != d) {
            throw DomainError("matrix is not square");
        }
        for (int j = 0; j < d; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    return m;
}

std::int64_t IntegerMatrix::determinant() const {
    const auto& m = *this;
    if (dim_ == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
           m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

std::int64_t IntegerMatrix::trace() const {
    std::int64_t t = 0;
    for (int i = 0; i < dim_; ++i) t += (*this)(i, i);
    return t;
}

bool IntegerMatrix::is_unimodular() const {
    const auto d = determinant();
    return d == 1 || d == -1;
}

bool IntegerMatrix::is_identity() const { return *this == identity(dim_); }

IntegerMatrix IntegerMatrix::inverse() const {
    const auto det = determinant();
    if (det != 1 && det != -1) throw DomainError("matrix is not unimodular (det = " + std::to_string(det) + ")");
    const auto& m = *this;
    IntegerMatrix inv(dim_);
    if (dim_ == 2) {
        inv(0, 0) = m(1, 1) * det;
        inv(0, 1) = -m(0, 1) * det;
        inv(1, 0) = -m(1, 0) * det;
        inv(1, 1) = m(0, 0) * det;
        return inv;
    }
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const int r0 = (j + 1) % 3;
            const int r1 = (j + 2) % 3;
            const int c0 = (i + 1) % 3;
            const int c1 = (i + 2) % 3;
            inv(i, j) = (m(r0, c0) * m(r1, c1) - m(r0, c1) * m(r1, c0)) * det;
        }
    }
    return inv;
}

IntegerMatrix IntegerMatrix::operator*(const IntegerMatrix& rhs) const {
    if (dim_ != rhs.dim_) throw DomainError("dimension mismatch in matrix product");
    IntegerMatrix out(dim_);
    for (int i = 0; i < dim_; ++i) {
        for (int j = 0; j < dim_; ++j) {
            std::int64_t s = 0;
            for (int k = 0; k < dim_; ++k) s += (*this)(i, k) * rhs(k, j);
            out(i, j) = s;
        }
    }
    return out;
}

IntegerMatrix IntegerMatrix::operator-(const IntegerMatrix& rhs) const {
    if (dim_ != rhs.dim_) throw DomainError("dimension mismatch in matrix difference");
    IntegerMatrix out(dim_);
    for (int i = 0; i < dim_; ++i) {
        for (int j = 0; j < dim_; ++j) out(i, j) = (*this)(i, j) - rhs(i, j);
    }
    return out;
}

Vec IntegerMatrix::apply(const Vec& v) const {
    Vec out{};
    for (int i = 0; i < dim_; ++i) {
        double s = 0.0;
        for (int j = 0; j < dim_; ++j) s += static_cast<double>((*this)(i, j)) * v[j];
        out[i] = s;
    }
    return out;
}

std::array<std::int64_t, kMaxDim> IntegerMatrix::apply_left(const std::array<std::int64_t, kMaxDim>& j) const {
    std::array<std::int64_t, kMaxDim> out{};
    for (int c = 0; c < dim_; ++c) {
        std::int64_t s = 0;
        for (int r = 0; r < dim_; ++r) s += j[r] * (*this)(r, c);
        out[c] = s;
    }
    return out;
}

double IntegerMatrix::norm_inf() const {
    double best = 0.0;
    for (int i = 0; i < dim_; ++i) {
        double s = 0.0;
        for (int j = 0; j < dim_; ++j) s += std::abs(static_cast<double>((*this)(i, j)));
        best = std::max(best, s);
    }
    return best;
}

double IntegerMatrix::norm_frobenius() const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) {
        for (int j = 0; j < dim_; ++j) {
            const auto v = static_cast<double>((*this)(i, j));
            s += v * v;
        }
    }
    return std::sqrt(s);
}

std::string IntegerMatrix::to_rows() const {
    std::ostringstream os;
    for (int i = 0; i < dim_; ++i) {
        for (int j = 0; j < dim_; ++j) {
            if (j) os << ',';
            os << (*this)(i, j);
        }
        os << '\n';
    }
    return os.str();
}

IntegerMatrix parse_matrix(std::string_view text) {
    std::vector<std::vector<std::int64_t>> rows;
    std::string line;
    auto flush = [&](std::string& s) {
        const auto first = s.find_first_not_of(" \t\r");
        if (first == std::string::npos) {
            s.clear();
            return;
        }
        std::vector<std::int64_t> row;
        std::size_t pos = 0;
        while (pos <= s.size()) {
            const auto comma = s.find(',', pos);
            const std::string cell = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            std::size_t used = 0;
            std::int64_t value = 0;
            try {
                value = std::stoll(cell, &used);
            } catch (const std::exception&) {
                throw ParseError("bad matrix entry '" + cell + "'");
            }
            if (cell.find_first_not_of(" \t\r", used) != std::string::npos) {
                throw ParseError("bad matrix entry '" + cell + "'");
            }
            row.push_back(value);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        rows.push_back(std::move(row));
        s.clear();
    };
    for (char ch : text) {
        if (ch == '\n' || ch == ';') {
            flush(line);
        } else {
            line.push_back(ch);
        }
    }
    flush(line);
    try {
        return IntegerMatrix::from_rows(rows);
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }
}

std::vector<std::complex<double>> eigenvalues(const IntegerMatrix& m) {
    const auto c = char_poly(m);
    if (m.dim() == 2) {
        auto [a, b] = quadratic_roots(c[1], c[0]);
        if (a.imag() == 0.0) {
            a = polish_root(c, a.real());
            b = polish_root(c, b.real());
        }
        return {a, b};
    }
    const double r = cubic_real_root(c);
    // x^3 - t x^2 + c2 x - D = (x - r)(x^2 + (r - t) x + D / r)
    const double t = -c[2];
    const double det = -c[0];
    if (r == 0.0) throw NumericalError("zero eigenvalue for a matrix expected to be unimodular");
    auto [a, b] = quadratic_roots(r - t, det / r);
    if (a.imag() == 0.0) {
        a = polish_root(c, a.real());
        b = polish_root(c, b.real());
    }
    return {r, a, b};
}

bool check_hyperbolic(const IntegerMatrix& m, double tol) {
    require_dim(m.dim());
    if (!m.is_unimodular()) {
        throw DomainError("matrix is not unimodular (det = " + std::to_string(m.determinant()) + ")");
    }
    for (const auto& ev : eigenvalues(m)) {
        if (std::abs(std::abs(ev) - 1.0) <= tol) return false;
    }
    return true;
}

bool check_commuting(const IntegerMatrix& a, const IntegerMatrix& b) {
    if (a.dim() != b.dim()) throw DomainError("dimension mismatch in commutation check");
    return a * b == b * a;
}

ToralAutomorphism::ToralAutomorphism(const IntegerMatrix& m) : matrix_(m) {
    if (!check_hyperbolic(m)) throw DomainError("matrix is not hyperbolic:\n" + m.to_rows());
    inverse_ = m.inverse();
    const int d = m.dim();
    for (const auto& ev : eigenvalues(m)) {
        if (ev.imag() != 0.0) {
            throw UnsupportedError("complex eigenvalues: invariant planes without real eigenvectors are not supported");
        }
        InvariantDirection dir{null_vector(m, ev.real()), ev.real()};
        (dir.rate() > 1.0 ? unstable_ : stable_).push_back(dir);
    }
    std::sort(unstable_.begin(), unstable_.end(), [](const auto& a, const auto& b) { return a.rate() > b.rate(); });
    std::sort(stable_.begin(), stable_.end(), [](const auto& a, const auto& b) { return a.rate() < b.rate(); });

    std::array<double, kMaxDim * kMaxDim> basis{};
    int col = 0;
    for (const auto* group : {&unstable_, &stable_}) {
        for (const auto& dir : *group) {
            for (int i = 0; i < d; ++i) basis[static_cast<std::size_t>(i * kMaxDim + col)] = dir.vector[i];
            ++col;
        }
    }
    if (!invert_small(basis, d, basis_inverse_)) throw NumericalError("eigenbasis is singular");
    if (splitting_residual() >= 1e-10) {
        throw NumericalError("eigen-splitting residual too large: " + std::to_string(splitting_residual()));
    }
}

std::vector<double> ToralAutomorphism::unstable_rates() const {
    std::vector<double> out;
    for (const auto& d : unstable_) out.push_back(d.rate());
    return out;
}

std::vector<double> ToralAutomorphism::stable_rates() const {
    std::vector<double> out;
    for (const auto& d : stable_) out.push_back(d.rate());
    return out;
}

double ToralAutomorphism::max_stable_rate() const { return stable_.back().rate(); }

double ToralAutomorphism::min_unstable_rate() const { return unstable_.back().rate(); }

ToralAutomorphism::Coordinates ToralAutomorphism::coordinates(const Vec& v) const {
    const int d = dim();
    std::vector<double> all(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < d; ++i) {
        double s = 0.0;
        for (int j = 0; j < d; ++j) s += basis_inverse_[static_cast<std::size_t>(i * kMaxDim + j)] * v[j];
        all[static_cast<std::size_t>(i)] = s;
    }
    Coordinates c;
    c.unstable.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(unstable_.size()));
    c.stable.assign(all.begin() + static_cast<std::ptrdiff_t>(unstable_.size()), all.end());
    return c;
}

double ToralAutomorphism::splitting_residual() const {
    double worst = 0.0;
    for (const auto* group : {&unstable_, &stable_}) {
        for (const auto& dir : *group) {
            const Vec mv = matrix_.apply(dir.vector);
            double r = 0.0;
            for (int i = 0; i < dim(); ++i) {
                const double e = mv[i] - dir.eigenvalue * dir.vector[i];
                r += e * e;
            }
            worst = std::max(worst, std::sqrt(r));
        }
    }
    return worst;
}

ToralAutomorphism compute_splitting(const IntegerMatrix& m) { return ToralAutomorphism(m); }

double wrap_unit(double x) {
    double r = x - std::floor(x);
    if (r >= 1.0) r = 0.0;
    return r;
}

double circle_offset(double x) { return x - std::nearbyint(x); }

TorusPoint TorusPoint::canonical() const {
    TorusPoint out{dim, {}};
    for (int i = 0; i < dim; ++i) out.coords[i] = wrap_unit(coords[i]);
    return out;
}

MappingTorusPoint MappingTorusPoint::canonical(const IntegerMatrix& gluing) const {
    const double k = std::floor(height);
    Vec v = base.coords;
    if (k != 0.0) {
        if (std::abs(k) > 64) throw DomainError("mapping-torus height too far from the fundamental domain");
        const IntegerMatrix step = k > 0 ? gluing : gluing.inverse();
        for (int i = 0; i < static_cast<int>(std::abs(k)); ++i) v = step.apply(TorusPoint{base.dim, v}.canonical().coords);
    }
    MappingTorusPoint out{TorusPoint{base.dim, v}.canonical(), height - k};
    if (out.height >= 1.0) out.height = 0.0;
    return out;
}

DyadicPoint DyadicPoint::from_real(const Vec& v, int dim) {
    DyadicPoint p;
    for (int i = 0; i < dim; ++i) {
        const double r = wrap_unit(v[i]);
        p.x[i] = static_cast<std::uint64_t>(std::ldexp(r, 64));
    }
    return p;
}

Vec DyadicPoint::to_real(int dim) const {
    Vec v{};
    for (int i = 0; i < dim; ++i) v[i] = unit(x[i]);
    return v;
}

DyadicPoint apply(const IntegerMatrix& m, const DyadicPoint& p) {
    DyadicPoint out;
    const int d = m.dim();
    for (int i = 0; i < d; ++i) {
        std::uint64_t s = 0;
        for (int j = 0; j < d; ++j) s += static_cast<std::uint64_t>(m(i, j)) * p.x[j];
        out.x[i] = s;
    }
    return out;
}

double dyadic_phase(const std::array<std::int64_t, kMaxDim>& j, const DyadicPoint& p, int dim) {
    std::uint64_t s = 0;
    for (int i = 0; i < dim; ++i) s += static_cast<std::uint64_t>(j[i]) * p.x[i];
    return DyadicPoint::unit(s);
}

}  // namespace skewlab
