#include "skewlab/plante.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "skewlab/error.hpp"

namespace skewlab {

namespace {

double bump(double s) { return std::abs(s) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0; }

double bump_derivative(double s) {
    if (std::abs(s) >= 1.0) return 0.0;
    const double w = 1.0 - s * s;
    return bump(s) * (-2.0 * s / (w * w));
}

// ceil with integer snapping against rounding in orbit counts.
double snapped_ceil(double q) {
    const double r = std::round(q);
    return std::abs(q - r) < 1e-9 ? r : std::ceil(q);
}

double scale(double x) { return std::max(1.0, std::abs(x)); }

}  // namespace

double Chart::operator()(double t) const {
    switch (kind) {
        case ChartKind::Identity: return t;
        case ChartKind::Cube: return t * t * t;
        case ChartKind::SinBump: return t + amplitude * std::sin(t) * bump(t / radius);
    }
    return t;
}

double Chart::derivative(double t) const {
    switch (kind) {
        case ChartKind::Identity: return 1.0;
        case ChartKind::Cube: return 3.0 * t * t;
        case ChartKind::SinBump: {
            const double s = t / radius;
            return 1.0 + amplitude * (std::cos(t) * bump(s) + std::sin(t) * bump_derivative(s) / radius);
        }
    }
    return 1.0;
}

double Chart::inverse(double x) const {
    switch (kind) {
        case ChartKind::Identity: return x;
        case ChartKind::Cube: return std::cbrt(x);
        case ChartKind::SinBump: break;
    }
    const double a = std::abs(amplitude);
    double lo = x - a, hi = x + a;
    if (a == 0.0) return x;
    double t = x;
    for (int it = 0; it < 200; ++it) {
        const double r = (*this)(t) - x;
        if (r == 0.0) return t;
        if (r > 0.0) hi = t;
        else lo = t;
        const double d = derivative(t);
        double next = d > 0.0 ? t - r / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - t) <= 4e-16 * scale(t)) return next;
        t = next;
    }
    return t;
}

void Chart::validate() const {
    if (kind != ChartKind::SinBump) return;
    if (!(radius > 0.0)) throw ValidationError("sinbump radius must be positive");
    constexpr int kScan = 20000;
    for (int i = 0; i <= kScan; ++i) {
        const double t = radius * (-1.0 + 2.0 * i / kScan);
        if (!(derivative(t) > 0.0)) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "sinbump chart is not increasing near t = %.6g", t);
            throw ValidationError(buf);
        }
    }
}

double LineAction::generator(std::size_t i, double x) const {
    const auto& g = generators.at(i);
    return chart(g.a * chart.inverse(x) + g.b);
}

double LineAction::generator_inverse(std::size_t i, double x) const {
    const auto& g = generators.at(i);
    return chart((chart.inverse(x) - g.b) / g.a);
}

double LineAction::f(double x) const { return chart(conjugator.a * chart.inverse(x) + conjugator.b); }

double LineAction::f_inverse(double x) const {
    return chart((chart.inverse(x) - conjugator.b) / conjugator.a);
}

double LineAction::conjugated(std::size_t i, double x) const { return f(generator(i, f_inverse(x))); }

double LineAction::word(const std::vector<int>& letters, double x) const {
    for (auto it = letters.rbegin(); it != letters.rend(); ++it) {
        const int l = *it;
        if (l == 0 || static_cast<std::size_t>(std::abs(l)) > size()) throw DomainError("word letter out of range");
        const auto i = static_cast<std::size_t>(std::abs(l) - 1);
        x = l > 0 ? generator(i, x) : generator_inverse(i, x);
    }
    return x;
}

double LineMeasure::mass(double x, double y) const {
    const double tx = chart.inverse(x), ty = chart.inverse(y);
    if (!atomic) return ty - tx;
    double m = 0.0;
    for (double s : seeds) m += snapped_ceil((ty - s) / spacing) - snapped_ceil((tx - s) / spacing);
    return m;
}

LineMeasure invariant_measure(const LineAction& action) {
    if (action.generators.empty()) throw DomainError("the action has no generators");
    action.chart.validate();
    for (const auto& g : action.generators) {
        if (g.a != 1.0) {
            throw UnsupportedError("only chart conjugates of translations are supported (generator slope " +
                                   std::to_string(g.a) + ")");
        }
    }
    LineMeasure mu;
    mu.chart = action.chart;
    if (action.gamma == GammaKind::Orbit) {
        if (action.seeds.empty()) throw DomainError("orbit Gamma needs at least one seed");
        double bmax = 0.0;
        for (const auto& g : action.generators) bmax = std::max(bmax, std::abs(g.b));
        if (bmax == 0.0) throw DomainError("orbit Gamma needs a nonzero translation");
        // Euclid on the translation amounts; a closed orbit needs them commensurable.
        double d = 0.0;
        for (const auto& g : action.generators) {
            double a = std::abs(g.b), b = d;
            while (b > 1e-9 * bmax) {
                const double r = std::fmod(a, b);
                a = b;
                b = std::min(r, b - r);
            }
            d = a;
        }
        for (const auto& g : action.generators) {
            const double q = g.b / d;
            if (d < 1e-6 * bmax || std::abs(q - std::round(q)) > 1e-9 * std::max(1.0, std::abs(q))) {
                throw UnsupportedError("orbit of incommensurable translations is not closed");
            }
        }
        mu.atomic = true;
        mu.spacing = d;
        mu.seeds = action.seeds;
    }
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ut(-10.0, 10.0);
    for (int s = 0; s < 100; ++s) {
        double t1 = ut(rng), t2 = ut(rng);
        if (t2 < t1) std::swap(t1, t2);
        const double x1 = action.chart(t1), x2 = action.chart(t2);
        const double m = mu.mass(x1, x2);
        for (std::size_t i = 0; i < action.size(); ++i) {
            mu.invariance_residual = std::max(
                mu.invariance_residual, std::abs(mu.mass(action.generator(i, x1), action.generator(i, x2)) - m));
            mu.invariance_residual =
                std::max(mu.invariance_residual, std::abs(mu.mass(action.generator_inverse(i, x1),
                                                                  action.generator_inverse(i, x2)) - m));
        }
    }
    if (mu.invariance_residual >= 1e-10) {
        throw ValidationError("measure invariance residual " + std::to_string(mu.invariance_residual));
    }
    return mu;
}

TranslationData translation_number(const LineAction& action, const LineMeasure& mu) {
    for (int j = 0; j <= 1000; ++j) {
        const double x = action.chart(-50.0 + 0.1 * j);
        bool all_fixed = true;
        for (std::size_t i = 0; i < action.size() && all_fixed; ++i) {
            all_fixed = std::abs(action.generator(i, x) - x) <= 1e-12 * scale(x);
        }
        if (all_fixed) {
            std::ostringstream msg;
            msg << "common fixed point near x = " << x
                << ": Fix(G) is nonempty, the first alternative of the trichotomy";
            throw DomainError(msg.str());
        }
    }
    TranslationData out;
    out.tau.assign(action.size(), 0.0);
    for (int j = 0; j < 10; ++j) {
        const double x = action.chart(-4.5 + j);
        for (std::size_t i = 0; i < action.size(); ++i) {
            const double t = mu.mass(x, action.generator(i, x));
            if (j == 0) out.tau[i] = t;
            else out.base_point_spread = std::max(out.base_point_spread, std::abs(t - out.tau[i]));
        }
    }
    if (out.base_point_spread >= 1e-10) {
        throw NumericalError("translation number depends on the base point (spread " +
                             std::to_string(out.base_point_spread) + ")");
    }
    return out;
}

double tau_word(const LineAction& action, const LineMeasure& mu, const std::vector<int>& letters, double x) {
    return mu.mass(x, action.word(letters, x));
}

double conjugation_scaling(const LineAction& action, const LineMeasure& mu, const TranslationData& tau) {
    const double x = action.chart(0.0);
    std::vector<double> ratios;
    for (std::size_t i = 0; i < action.size(); ++i) {
        if (tau.tau[i] == 0.0) continue;
        ratios.push_back(mu.mass(x, action.conjugated(i, x)) / tau.tau[i]);
    }
    if (ratios.empty()) throw DomainError("tau vanishes on every generator");
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    if (*hi - *lo > 1e-10 * scale(*hi)) {
        std::ostringstream msg;
        msg << "inconsistent conjugation ratios in [" << *lo << ", " << *hi << "]: f does not scale tau";
        throw DomainError(msg.str());
    }
    return ratios.front();
}

double MasterSemiconjugacy::operator()(double x) const { return mu.mass(base, x) - offset; }

MasterSemiconjugacy master_semiconjugacy(const LineAction& action, int grid, double half_width) {
    if (grid < 2) throw DomainError("semiconjugacy grid must have at least 2 points");
    MasterSemiconjugacy out;
    out.mu = invariant_measure(action);
    out.tau = translation_number(action, out.mu);
    out.lambda = conjugation_scaling(action, out.mu, out.tau);
    if (std::abs(out.lambda - 1.0) < 1e-9) {
        throw DomainError("lambda = 1: the semiconjugacy needs a conjugator that rescales tau");
    }
    out.base = action.chart(0.0);
    const double kappa = out.mu.mass(out.base, action.f(out.base));
    out.offset = kappa / (1.0 - out.lambda);
    const auto& p = out;

    // Bracket and bisect the boundary of P^{-1}(0).
    double lo = out.base - 1.0, hi = out.base + 1.0;
    for (int i = 0; i < 200 && !(p(lo) < 0.0); ++i) lo = out.base - 2.0 * (out.base - lo);
    for (int i = 0; i < 200 && !(p(hi) > 0.0); ++i) hi = out.base + 2.0 * (hi - out.base);
    if (!(p(lo) < 0.0) || !(p(hi) > 0.0)) throw NumericalError("could not bracket P^{-1}(0)");
    auto boundary = [&](auto below) {
        double a = lo, b = hi;
        for (int i = 0; i < 200; ++i) {
            const double m = 0.5 * (a + b);
            if (m == a || m == b) break;
            if (below(p(m))) a = m;
            else b = m;
        }
        return 0.5 * (a + b);
    };
    out.zero_lo = boundary([](double v) { return v < 0.0; });
    out.zero_hi = boundary([](double v) { return v <= 0.0; });

    const auto g = [&](double x) { return action.f(x) - x; };
    if (out.zero_hi - out.zero_lo <= 1e-12 * scale(out.zero_hi)) {
        out.fixed_point = 0.5 * (out.zero_lo + out.zero_hi);
    } else {
        double a = out.zero_lo, b = out.zero_hi;
        double ga = g(a), gb = g(b);
        if (ga == 0.0) out.fixed_point = a;
        else if (gb == 0.0) out.fixed_point = b;
        else if ((ga > 0.0) != (gb > 0.0)) {
            for (int i = 0; i < 200; ++i) {
                const double m = 0.5 * (a + b);
                if (m == a || m == b) break;
                const double gm = g(m);
                if ((gm > 0.0) == (ga > 0.0)) {
                    a = m;
                    ga = gm;
                } else {
                    b = m;
                }
            }
            out.fixed_point = 0.5 * (a + b);
        } else {
            out.fixed_point = std::abs(ga) < std::abs(gb) ? a : b;
        }
    }

    const auto n = static_cast<std::size_t>(grid);
    out.x.resize(n);
    out.p.resize(n);
    // On a discrete Gamma the equations are checked on orbit points around the fixed point.
    const double s0 = out.mu.atomic ? out.mu.seeds.front() : 0.0;
    const double k0 = out.mu.atomic
                          ? std::round((action.chart.inverse(out.fixed_point) - s0) / out.mu.spacing) - grid / 2
                          : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = out.mu.atomic
                             ? action.chart(s0 + (k0 + static_cast<double>(i)) * out.mu.spacing)
                             : out.fixed_point - half_width + 2.0 * half_width * static_cast<double>(i) / (grid - 1);
        out.x[i] = x;
        out.p[i] = p(x);
        for (std::size_t k = 0; k < action.size(); ++k) {
            out.residual_g =
                std::max(out.residual_g, std::abs(p(action.generator(k, x)) - out.p[i] - out.tau.tau[k]));
        }
        out.residual_f = std::max(out.residual_f, std::abs(p(action.f(x)) - out.lambda * out.p[i]));
    }
    return out;
}

std::optional<double> commuting_fixed_point(const LineAction& action, const MasterSemiconjugacy& p,
                                            const std::function<double(double)>& h) {
    for (double x : p.x) {
        if (std::abs(h(action.f(x)) - action.f(h(x))) > 1e-9 * scale(x)) {
            std::ostringstream msg;
            msg << "h does not commute with f at x = " << x;
            throw DomainError(msg.str());
        }
    }
    const auto fixed = [&](double x) { return std::abs(h(x) - x) < 1e-10 * scale(x); };
    double a = p.zero_lo, b = p.zero_hi;
    if (b - a <= 1e-12 * scale(b)) {
        const double x = 0.5 * (a + b);
        if (fixed(x)) return x;
        return std::nullopt;
    }
    if (fixed(a)) return a;
    if (fixed(b)) return b;
    double ha = h(a) - a;
    if ((ha > 0.0) == (h(b) - b > 0.0)) return std::nullopt;
    for (int i = 0; i < 200; ++i) {
        const double m = 0.5 * (a + b);
        if (m == a || m == b) break;
        const double hm = h(m) - m;
        if ((hm > 0.0) == (ha > 0.0)) {
            a = m;
            ha = hm;
        } else {
            b = m;
        }
    }
    const double x = 0.5 * (a + b);
    if (fixed(x)) return x;
    return std::nullopt;
}

FixedCosetReport fixed_coset_check(const IntegerMatrix& m, int radius) {
    const int d = m.dim();
    const IntegerMatrix n = m - IntegerMatrix::identity(d);
    FixedCosetReport out;
    out.det = n.determinant();
    out.injective = out.det != 0;
    out.bijective = out.det == 1 || out.det == -1;
    if (out.injective && !out.bijective) {
        // Preimage of e_i is column i of adj(N) / det.
        for (int i = 0; i < d && out.missing_unit < 0; ++i) {
            for (int r = 0; r < d; ++r) {
                std::int64_t cof = 0;
                if (d == 1) {
                    cof = 1;
                } else {
                    // cofactor C_{i r} of N gives adj(N)_{r i}
                    std::array<std::int64_t, 4> minor{};
                    int k = 0;
                    for (int a = 0; a < d; ++a) {
                        if (a == i) continue;
                        for (int b = 0; b < d; ++b) {
                            if (b == r) continue;
                            minor[static_cast<std::size_t>(k++)] = n(a, b);
                        }
                    }
                    const std::int64_t det_minor = d == 2 ? minor[0] : minor[0] * minor[3] - minor[1] * minor[2];
                    cof = ((i + r) % 2 == 0 ? 1 : -1) * det_minor;
                }
                if (cof % out.det != 0) {
                    out.missing_unit = i;
                    break;
                }
            }
        }
    }
    std::vector<std::array<std::int64_t, kMaxDim>> images;
    std::array<std::int64_t, kMaxDim> g{};
    const int side = 2 * radius + 1;
    int total = 1;
    for (int i = 0; i < d; ++i) total *= side;
    for (int code = 0; code < total; ++code) {
        int c = code;
        for (int i = 0; i < d; ++i) {
            g[i] = c % side - radius;
            c /= side;
        }
        std::array<std::int64_t, kMaxDim> img{};
        for (int r = 0; r < d; ++r) {
            for (int k = 0; k < d; ++k) img[r] += n(r, k) * g[k];
        }
        images.push_back(img);
    }
    std::sort(images.begin(), images.end());
    for (std::size_t i = 1; i < images.size(); ++i) {
        if (images[i] == images[i - 1]) ++out.box_collisions;
    }
    return out;
}

LineAction parse_action(std::string_view text) {
    LineAction a;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    bool have_gamma = false;
    auto fail = [&](const std::string& what) {
        throw ParseError("line " + std::to_string(lineno) + ": " + what);
    };
    auto number = [&](std::istringstream& s, const char* what) {
        double v;
        if (!(s >> v)) fail(std::string("expected ") + what);
        return v;
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream s(line);
        std::string key;
        if (!(s >> key)) continue;
        if (key == "gamma") {
            std::string kind;
            s >> kind;
            if (kind == "real") {
                a.gamma = GammaKind::Real;
            } else if (kind == "orbit") {
                a.gamma = GammaKind::Orbit;
                double v;
                while (s >> v) a.seeds.push_back(v);
                if (a.seeds.empty()) fail("orbit needs at least one seed");
            } else {
                fail("gamma must be real or orbit");
            }
            have_gamma = true;
        } else if (key == "chart") {
            std::string kind;
            s >> kind;
            if (kind == "identity") a.chart.kind = ChartKind::Identity;
            else if (kind == "cube") a.chart.kind = ChartKind::Cube;
            else if (kind == "sinbump") {
                a.chart.kind = ChartKind::SinBump;
                a.chart.amplitude = number(s, "sinbump amplitude");
                a.chart.radius = number(s, "sinbump radius");
            } else {
                fail("chart must be identity, cube or sinbump");
            }
        } else if (key == "generator") {
            AffineMap g;
            g.a = number(s, "generator slope");
            g.b = number(s, "generator offset");
            if (!(g.a > 0.0)) fail("generators must be order-preserving (a > 0)");
            a.generators.push_back(g);
        } else if (key == "conjugator") {
            a.conjugator.a = number(s, "conjugator slope");
            a.conjugator.b = number(s, "conjugator offset");
            if (!(a.conjugator.a > 0.0)) fail("the conjugator must be order-preserving (a > 0)");
        } else {
            fail("unknown key '" + key + "'");
        }
        std::string extra;
        if (key != "gamma" && (s >> extra)) fail("trailing input '" + extra + "'");
    }
    if (!have_gamma) throw ParseError("missing gamma line");
    if (a.generators.empty()) throw ParseError("no generators");
    a.chart.validate();
    return a;
}

LineAction load_action(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return parse_action(s.str());
}

std::string semiconjugacy_csv(const MasterSemiconjugacy& p) {
    std::string out = "x,P\n";
    char buf[64];
    for (std::size_t i = 0; i < p.x.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.x[i], p.p[i]);
        out += buf;
    }
    return out;
}

}  // namespace skewlab
