#include "skewlab/circle_maps.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "skewlab/error.hpp"

namespace skewlab {

namespace {

double hermite(double y0, double y1, double d0, double d1, double h, double t) {
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * d1;
}

double hermite_slope(double y0, double y1, double d0, double d1, double h, double t) {
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * h * d0 + (-6 * t2 + 6 * t) * y1 + (3 * t2 - 2 * t) * h * d1) /
           h;
}

}  // namespace

MonotoneCircleLift::MonotoneCircleLift(std::vector<double> samples) : y_(std::move(samples)) {
    const std::size_t g = y_.size();
    if (g < 4) throw ValidationError("circle lift needs at least 4 samples");
    for (std::size_t i = 0; i < g; ++i) {
        const double next = i + 1 < g ? y_[i + 1] : y_[0] + 1.0;
        if (!(next > y_[i])) {
            throw ValidationError("circle lift is not strictly increasing at x = " +
                                  std::to_string(static_cast<double>(i) / static_cast<double>(g)));
        }
    }
    const double h = 1.0 / static_cast<double>(g);
    std::vector<double> secant(g);
    for (std::size_t i = 0; i < g; ++i) {
        const double next = i + 1 < g ? y_[i + 1] : y_[0] + 1.0;
        secant[i] = (next - y_[i]) / h;
    }
    d_.resize(g);
    for (std::size_t i = 0; i < g; ++i) {
        const double a = secant[(i + g - 1) % g];
        const double b = secant[i];
        d_[i] = 2.0 * a * b / (a + b);
    }
}

MonotoneCircleLift MonotoneCircleLift::rotation(double r, int grid) {
    return from_function([r](double x) { return x + r; }, grid);
}

double MonotoneCircleLift::operator()(double x) const {
    const double k = std::floor(x);
    const auto g = static_cast<std::size_t>(grid());
    const double s = (x - k) * static_cast<double>(g);
    std::size_t i = static_cast<std::size_t>(s);
    if (i >= g) i = g - 1;
    const double t = s - static_cast<double>(i);
    const bool last = i + 1 == g;
    const double y1 = last ? y_[0] + 1.0 : y_[i + 1];
    const double d1 = last ? d_[0] : d_[i + 1];
    return k + hermite(y_[i], y1, d_[i], d1, 1.0 / static_cast<double>(g), t);
}

double MonotoneCircleLift::derivative(double x) const {
    const double k = std::floor(x);
    const auto g = static_cast<std::size_t>(grid());
    const double s = (x - k) * static_cast<double>(g);
    std::size_t i = static_cast<std::size_t>(s);
    if (i >= g) i = g - 1;
    const double t = s - static_cast<double>(i);
    const bool last = i + 1 == g;
    const double y1 = last ? y_[0] + 1.0 : y_[i + 1];
    const double d1 = last ? d_[0] : d_[i + 1];
    return hermite_slope(y_[i], y1, d_[i], d1, 1.0 / static_cast<double>(g), t);
}

double MonotoneCircleLift::inverse(double y) const {
    // shift y into [y_0, y_0 + 1)
    const double k = std::floor(y - y_[0]);
    const double yr = y - k;
    const auto it = std::upper_bound(y_.begin(), y_.end(), yr);
    const auto i = static_cast<std::size_t>(std::distance(y_.begin(), it)) - 1;
    const double h = 1.0 / static_cast<double>(y_.size());
    double lo = static_cast<double>(i) * h;
    double hi = lo + h;
    for (int it2 = 0; it2 < 200 && hi - lo > 1e-17; ++it2) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if ((*this)(mid) < yr) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi) + k;
}

MonotoneCircleLift MonotoneCircleLift::compose(const MonotoneCircleLift& inner) const {
    return from_function([&](double x) { return (*this)(inner(x)); }, grid());
}

MonotoneCircleLift MonotoneCircleLift::inverse_lift() const {
    return from_function([&](double x) { return inverse(x); }, grid());
}

double MonotoneCircleLift::max_displacement() const {
    double best = 0.0;
    const double g = static_cast<double>(y_.size());
    for (std::size_t i = 0; i < y_.size(); ++i) best = std::max(best, std::abs(y_[i] - static_cast<double>(i) / g));
    return best;
}

std::vector<std::pair<std::int64_t, std::int64_t>> convergents(double x, std::int64_t max_q) {
    std::vector<std::pair<std::int64_t, std::int64_t>> out;
    std::int64_t p0 = 1, q0 = 0;  // p_{-1}/q_{-1}
    std::int64_t pm = 0, qm = 1;  // p_{-2}/q_{-2}
    double r = x;
    for (int it = 0; it < 64; ++it) {
        const double a = std::floor(r);
        if (std::abs(a) > 1e15) break;
        const auto ai = static_cast<std::int64_t>(a);
        const std::int64_t p = ai * p0 + pm;
        const std::int64_t q = ai * q0 + qm;
        if (q > max_q) break;
        out.emplace_back(p, q);
        pm = p0;
        qm = q0;
        p0 = p;
        q0 = q;
        const double frac = r - a;
        if (frac < 1e-15) break;
        r = 1.0 / frac;
    }
    return out;
}

namespace {

double iterate(const CircleFn& f, double x, std::int64_t q) {
    for (std::int64_t i = 0; i < q; ++i) x = f(x);
    return x;
}

}  // namespace

std::optional<RotationNumber> snap_rational(const CircleFn& lift, double rho, double error_bound, std::int64_t max_q) {
    constexpr int kScan = 512;
    constexpr double kZeroTol = 1e-12;
    for (const auto& [p, q] : convergents(rho, max_q)) {
        const double approx = static_cast<double>(p) / static_cast<double>(q);
        if (std::abs(rho - approx) >= 1.0 / static_cast<double>(q * q)) continue;
        if (std::abs(rho - approx) > 2.0 * error_bound + 1e-12) continue;
        auto defect = [&](double x) { return iterate(lift, x, q) - x - static_cast<double>(p); };
        std::optional<double> found;
        double prev_x = 0.0;
        double prev_d = defect(0.0);
        if (std::abs(prev_d) < kZeroTol) found = 0.0;
        for (int i = 1; i <= kScan && !found; ++i) {
            const double x = static_cast<double>(i) / kScan;
            const double d = defect(x);
            if (std::abs(d) < kZeroTol) {
                found = x;
            } else if ((d > 0) != (prev_d > 0)) {
                double lo = prev_x, hi = x;
                double dlo = prev_d;
                for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (mid <= lo || mid >= hi) break;
                    const double dm = defect(mid);
                    if (dm == 0.0) {
                        lo = hi = mid;
                        break;
                    }
                    if ((dm > 0) == (dlo > 0)) {
                        lo = mid;
                        dlo = dm;
                    } else {
                        hi = mid;
                    }
                }
                found = 0.5 * (lo + hi);
            }
            prev_x = x;
            prev_d = d;
        }
        if (found) {
            RotationNumber r;
            r.rho = rho;
            r.error_bound = error_bound;
            r.rational = true;
            r.p = p;
            r.q = q;
            r.periodic_point = *found;
            return r;
        }
    }
    return std::nullopt;
}

RotationNumber rotation_number(const CircleFn& lift, std::int64_t n_iter) {
    if (n_iter < 1000) throw DomainError("rotation_number needs at least 1000 iterations");
    const double x0 = 0.0;
    double x = x0;
    std::int64_t turns = 0;
    for (std::int64_t i = 0; i < n_iter; ++i) {
        const double y = lift(x);
        const double k = std::floor(y);
        turns += static_cast<std::int64_t>(k);
        x = y - k;
    }
    RotationNumber r;
    r.rho = (static_cast<double>(turns) + (x - x0)) / static_cast<double>(n_iter);
    r.error_bound = 1.0 / static_cast<double>(n_iter);
    if (auto snapped = snap_rational(lift, r.rho, r.error_bound)) return *snapped;
    return r;
}

RotationNumber rotation_number(const MonotoneCircleLift& lift, std::int64_t n_iter) {
    return rotation_number(CircleFn([&lift](double x) { return lift(x); }), n_iter);
}

double CircleMeasure::operator()(double x) const {
    const double k = std::floor(x);
    const double f = x - k;
    if (atomic()) {
        const auto below = std::lower_bound(atoms.begin(), atoms.end(), f) - atoms.begin();
        return k + static_cast<double>(below) / static_cast<double>(atoms.size());
    }
    const auto g = cdf.size() - 1;
    const double s = f * static_cast<double>(g);
    std::size_t i = static_cast<std::size_t>(s);
    if (i >= g) i = g - 1;
    const double t = s - static_cast<double>(i);
    return k + cdf[i] + t * (cdf[i + 1] - cdf[i]);
}

CircleMeasure invariant_measure(const CircleFn& lift, std::int64_t n_samples, int grid) {
    CircleMeasure mu;
    const auto rot = rotation_number(lift, std::max<std::int64_t>(n_samples / 10, 1000));
    if (rot.rational) {
        double x = rot.periodic_point - std::floor(rot.periodic_point);
        for (std::int64_t i = 0; i < rot.q; ++i) {
            mu.atoms.push_back(x);
            x = lift(x);
            x -= std::floor(x);
        }
        std::sort(mu.atoms.begin(), mu.atoms.end());
        return mu;
    }
    std::vector<std::int64_t> hist(static_cast<std::size_t>(grid), 0);
    double x = 0.0;
    for (std::int64_t i = 0; i < n_samples; ++i) {
        x = lift(x);
        x -= std::floor(x);
        auto b = static_cast<std::size_t>(x * grid);
        if (b >= hist.size()) b = hist.size() - 1;
        ++hist[b];
    }
    mu.cdf.assign(static_cast<std::size_t>(grid) + 1, 0.0);
    std::int64_t acc = 0;
    for (std::size_t i = 0; i < hist.size(); ++i) {
        acc += hist[i];
        mu.cdf[i + 1] = static_cast<double>(acc) / static_cast<double>(n_samples);
    }
    mu.cdf.back() = 1.0;
    return mu;
}

CircleMeasure invariant_measure(const MonotoneCircleLift& lift, std::int64_t n_samples, int grid) {
    return invariant_measure(CircleFn([&lift](double x) { return lift(x); }), n_samples, grid);
}

double invariance_residual(const MonotoneCircleLift& lift, const CircleMeasure& mu, int grid) {
    const double base = mu(lift.inverse(0.0));
    double worst = 0.0;
    for (int i = 0; i <= grid; ++i) {
        const double x = static_cast<double>(i) / grid;
        const double pulled = mu(lift.inverse(x)) - base;
        worst = std::max(worst, std::abs(pulled - mu(x)));
    }
    return worst;
}

double SampledCircleMap::operator()(double x) const {
    const double k = std::floor(x);
    const auto g = values.size();
    const double s = (x - k) * static_cast<double>(g);
    std::size_t i = static_cast<std::size_t>(s);
    if (i >= g) i = g - 1;
    const double t = s - static_cast<double>(i);
    const double next = i + 1 < g ? values[i + 1] : values[0] + 1.0;
    return k + values[i] + t * (next - values[i]);
}

Semiconjugacy semiconjugacy_to_rotation(const MonotoneCircleLift& lift, std::int64_t n_iter, int grid) {
    Semiconjugacy out;
    out.rotation = rotation_number(lift, n_iter);
    if (out.rotation.rational) {
        throw DomainError("rotation number is rational (" + std::to_string(out.rotation.p) + "/" +
                          std::to_string(out.rotation.q) +
                          "); use the periodic orbit and invariant_measure atoms instead of a semiconjugacy");
    }
    const auto mu = invariant_measure(lift, n_iter, grid);
    out.p.values.resize(static_cast<std::size_t>(grid));
    for (int i = 0; i < grid; ++i) out.p.values[static_cast<std::size_t>(i)] = mu(static_cast<double>(i) / grid);
    for (int i = 0; i < grid; ++i) {
        const double x = static_cast<double>(i) / grid;
        const double r = out.p(lift(x)) - out.p(x) - out.rotation.rho;
        out.defect = std::max(out.defect, std::abs(r - std::nearbyint(r)));
    }
    return out;
}

std::string csv_table(const std::vector<double>& x, const std::vector<double>& value) {
    std::string out = "x,value\n";
    char buf[64];
    for (std::size_t i = 0; i < x.size() && i < value.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", x[i], value[i]);
        out += buf;
    }
    return out;
}

std::string lift_csv(const MonotoneCircleLift& lift) {
    std::vector<double> x(lift.samples().size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i) / static_cast<double>(x.size());
    return csv_table(x, lift.samples());
}

std::string measure_csv(const CircleMeasure& mu) {
    const std::size_t g = mu.atomic() ? 4096 : mu.cdf.size() - 1;
    std::vector<double> x(g + 1), v(g + 1);
    for (std::size_t i = 0; i <= g; ++i) {
        x[i] = static_cast<double>(i) / static_cast<double>(g);
        v[i] = i == g ? 1.0 : mu(x[i]);
    }
    return csv_table(x, v);
}

std::string map_csv(const SampledCircleMap& map) {
    std::vector<double> x(map.values.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i) / static_cast<double>(x.size());
    return csv_table(x, map.values);
}

double TrigCircleMap::operator()(double x) const {
    constexpr double w = 2.0 * std::numbers::pi;
    double y = x + rotation;
    for (const auto& t : terms) y += t.c * (t.cosine ? std::cos(w * t.k * x) : std::sin(w * t.k * x));
    return y;
}

double TrigCircleMap::derivative(double x) const {
    constexpr double w = 2.0 * std::numbers::pi;
    double d = 1.0;
    for (const auto& t : terms) d += t.c * w * t.k * (t.cosine ? -std::sin(w * t.k * x) : std::cos(w * t.k * x));
    return d;
}

void TrigCircleMap::validate() const {
    double bound = 0.0;
    int kmax = 1;
    for (const auto& t : terms) {
        bound += 2.0 * std::numbers::pi * t.k * std::abs(t.c);
        kmax = std::max(kmax, t.k);
    }
    if (bound < 1.0) return;
    const int n = 64 * kmax * 16;
    for (int i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) / n;
        if (!(derivative(x) > 0.0)) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "circle map is not increasing near x = %.6g", x);
            throw ValidationError(buf);
        }
    }
}

TrigCircleMap parse_circle_map(std::string_view text) {
    TrigCircleMap m;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& what) {
        throw ParseError("line " + std::to_string(lineno) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream s(line);
        std::string key;
        if (!(s >> key)) continue;
        if (key == "rotation") {
            if (!(s >> m.rotation)) fail("expected a rotation value");
        } else if (key == "coeff") {
            std::string kind;
            TrigCircleMap::Term t;
            if (!(s >> kind >> t.k >> t.c)) fail("expected coeff sin|cos k c");
            if (kind != "sin" && kind != "cos") fail("coefficient kind must be sin or cos");
            if (t.k < 1) fail("frequency must be a positive integer");
            t.cosine = kind == "cos";
            m.terms.push_back(t);
        } else {
            fail("unknown key '" + key + "'");
        }
        std::string extra;
        if (s >> extra) fail("trailing input '" + extra + "'");
    }
    m.validate();
    return m;
}

TrigCircleMap load_circle_map(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return parse_circle_map(s.str());
}

}  // namespace skewlab
