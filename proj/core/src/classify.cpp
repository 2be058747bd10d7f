#include "skewlab/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "skewlab/error.hpp"
#include "skewlab/parallel.hpp"

namespace skewlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kUnitDerivative = 1e-6;
constexpr int kIntervalSamples = 64;
constexpr int kEscapeSteps = 10000;

double iterate(const FiberAt& f, double z, std::int64_t n) {
    for (std::int64_t i = 0; i < n; ++i) z = f.map(z);
    return z;
}

double iterate_derivative(const FiberAt& f, double z, std::int64_t n) {
    double d = 1.0;
    for (std::int64_t i = 0; i < n; ++i) {
        d *= f.derivative(z);
        z = f.map(z);
    }
    return d;
}

// Circle distance from z to the nearest point of K.
double distance_to(const std::vector<HeightInterval>& k, double z) {
    double best = 1.0;
    for (const auto& h : k) {
        if (h.contains(z)) return 0.0;
        best = std::min(best, std::abs(circle_offset(z - h.lo)));
        best = std::min(best, std::abs(circle_offset(z - h.hi)));
    }
    return best;
}

std::vector<double> samples_of(const HeightInterval& h) {
    if (h.point()) return {h.lo};
    std::vector<double> s;
    for (int i = 0; i <= 8; ++i) s.push_back(h.lo + h.length() * i / 8.0);
    return s;
}

IntervalReport analyse_interval(const FiberAt& f, const HeightInterval& iv, std::int64_t n, std::int64_t p,
                                double tol) {
    IntervalReport out;
    out.interval = iv;
    const auto g = [&](double z) { return iterate(f, z, n) - z - static_cast<double>(p); };
    const double a = iv.lo, b = iv.hi;
    std::optional<double> root;
    double prev_z = 0.0, prev_d = 0.0;
    for (int i = 0; i < kIntervalSamples && !root; ++i) {
        const double z = a + (b - a) * (i + 0.5) / kIntervalSamples;
        const double d = g(z);
        if (std::abs(d) < tol) {
            root = z;
        } else if (i > 0 && (d > 0) != (prev_d > 0)) {
            double lo = prev_z, hi = z, dlo = prev_d;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double dm = g(mid);
                if ((dm > 0) == (dlo > 0)) {
                    lo = mid;
                    dlo = dm;
                } else {
                    hi = mid;
                }
            }
            root = 0.5 * (lo + hi);
        }
        prev_z = z;
        prev_d = d;
    }
    if (root) {
        out.fixed_height = wrap_unit(*root);
        out.lambda = iterate_derivative(f, *root, n);
        out.sub_case = std::abs(out.lambda - 1.0) > kUnitDerivative ? IntervalCase::Scaling : IntervalCase::Accessible;
        return out;
    }
    out.sub_case = IntervalCase::AttractorRepeller;
    double z = 0.5 * (a + b);
    for (int i = 0; i < kEscapeSteps; ++i) {
        const double next = g(z) + z;
        if (next <= a || next >= b) break;
        z = next;
    }
    out.escape_distance = std::min(std::abs(z - a), std::abs(b - z));
    return out;
}

}  // namespace

const char* to_string(CaseTag tag) {
    switch (tag) {
        case CaseTag::Accessible: return "accessible";
        case CaseTag::JointlyIntegrable: return "jointly_integrable";
        case CaseTag::Laminated: return "laminated";
    }
    return "unknown";
}

const char* to_string(IntervalCase c) {
    switch (c) {
        case IntervalCase::Accessible: return "accessible";
        case IntervalCase::AttractorRepeller: return "attractor_repeller";
        case IntervalCase::Scaling: return "scaling";
    }
    return "unknown";
}

ClassificationReport classify(const SkewProductSystem& sys, const ClassifyOptions& options) {
    ClassificationReport r;
    r.options = options;
    const auto gens = generator_loops(sys.base());
    const auto kc = detect_compact_classes(sys, gens, options.grid, options.tol, options.depth);
    r.indeterminate_bands = kc.indeterminate;
    r.indeterminate_fraction = kc.indeterminate_fraction;
    r.generator_max_displacement = kc.generator_max;
    r.heights = kc.heights;
    r.displacement = kc.displacement;
    r.min_displacement = kc.min_displacement;
    r.max_displacement = kc.max_displacement;
    r.tail_bound = kc.tail_bound;
    if (kc.indeterminate_fraction > options.max_indeterminate_fraction) {
        std::ostringstream msg;
        msg << "indeterminate fraction " << kc.indeterminate_fraction << " exceeds "
            << options.max_indeterminate_fraction << " (" << kc.indeterminate.size() << " bands)";
        throw InconclusiveError(msg.str());
    }

    const FiberAt f = sys.fiber_at(DyadicPoint{});
    r.rotation = rotation_number(CircleFn([&f](double z) { return f.map(z); }), options.rotation_iters);
    r.irrational_case = !r.rotation.rational;
    r.n = r.rotation.rational ? r.rotation.q : 1;
    r.k = kc.fixed;
    r.u = kc.complement();

    if (kc.empty()) {
        r.tag = CaseTag::Accessible;
        r.n = 1;
        return r;
    }
    r.tag = kc.full_circle() ? CaseTag::JointlyIntegrable : CaseTag::Laminated;

    for (const auto& h : r.k) {
        for (double z : samples_of(h)) {
            r.k_invariance_residual = std::max(r.k_invariance_residual, distance_to(r.k, f.map(z)));
            if (r.rotation.rational) {
                const double d = iterate(f, z, r.rotation.q) - z - static_cast<double>(r.rotation.p);
                r.period_residual = std::max(r.period_residual, std::abs(d));
            }
        }
    }
    if (r.tag == CaseTag::Laminated && r.rotation.rational) {
        for (const auto& iv : r.u) {
            r.intervals.push_back(analyse_interval(f, iv, r.rotation.q, r.rotation.p, options.tol));
        }
    }
    if (r.irrational_case) {
        r.semiconjugacy = semiconjugacy_to_rotation(restrict_to_invariant_circle(sys), options.rotation_iters);
    }
    return r;
}

double TestFunction::operator()(const SkewPoint& p, int dim) const {
    const double ph = dyadic_phase(base, p.v, dim) + static_cast<double>(fiber) * p.z;
    return phase == Phase::Cos ? std::cos(kTwoPi * ph) : std::sin(kTwoPi * ph);
}

double TestFunction::operator()(const Vec& v, double z, int dim) const {
    double ph = static_cast<double>(fiber) * z;
    for (int i = 0; i < dim; ++i) ph += static_cast<double>(base[i]) * v[i];
    return phase == Phase::Cos ? std::cos(kTwoPi * ph) : std::sin(kTwoPi * ph);
}

std::string TestFunction::name(int dim) const {
    static const char* const kVars[] = {"x", "y", "w"};
    std::string arg;
    auto add = [&](std::int64_t c, const std::string& var) {
        if (c == 0) return;
        if (!arg.empty()) arg += c > 0 ? "+" : "-";
        else if (c < 0) arg += "-";
        const auto m = c < 0 ? -c : c;
        if (m != 1) arg += std::to_string(m);
        arg += var;
    };
    for (int i = 0; i < dim; ++i) add(base[i], kVars[i]);
    add(fiber, "z");
    if (arg.empty()) arg = "0";
    return std::string(phase == Phase::Cos ? "cos" : "sin") + "(2pi(" + arg + "))";
}

std::vector<TestFunction> default_test_functions(int dim) {
    auto make = [](std::int64_t x, std::int64_t y, std::int64_t z, Phase ph) {
        TestFunction t;
        t.base[0] = x;
        t.base[1] = y;
        t.fiber = z;
        t.phase = ph;
        return t;
    };
    (void)dim;
    return {make(1, 0, 0, Phase::Cos), make(0, 1, 0, Phase::Sin), make(1, 1, 0, Phase::Cos),
            make(0, 0, 1, Phase::Cos), make(0, 0, 1, Phase::Sin), make(1, 0, 1, Phase::Cos)};
}

std::vector<TestFunction> trig_test_family(int dim, int max_freq) {
    if (max_freq < 0) throw DomainError("max_freq must be non-negative");
    std::vector<TestFunction> out;
    const int n = dim + 1;
    const int side = 2 * max_freq + 1;
    int total = 1;
    for (int i = 0; i < n; ++i) total *= side;
    for (int code = 0; code < total; ++code) {
        std::array<std::int64_t, kMaxDim + 1> f{};
        int c = code;
        for (int i = 0; i < n; ++i) {
            f[i] = c % side - max_freq;
            c /= side;
        }
        // keep one representative of each +-pair: first nonzero frequency positive
        int first = 0;
        while (first < n && f[first] == 0) ++first;
        if (first == n || f[first] < 0) continue;
        for (Phase ph : {Phase::Cos, Phase::Sin}) {
            TestFunction t;
            for (int i = 0; i < dim; ++i) t.base[i] = f[i];
            t.fiber = f[dim];
            t.phase = ph;
            out.push_back(t);
        }
    }
    return out;
}

BirkhoffStats birkhoff_stats(const SkewProductSystem& sys, const std::vector<TestFunction>& tests, SkewPoint start,
                             std::int64_t n, Direction direction, std::int64_t period) {
    if (n < 1) throw DomainError("Birkhoff average needs n >= 1");
    if (period < 1) throw DomainError("period must be >= 1");
    if (n > kMaxSteps / period) throw DomainError("orbit length exceeds the step cap");
    const int d = sys.dim();
    const std::size_t m = tests.size();
    const std::int64_t batch = std::max<std::int64_t>(1, n / kBatches);
    const std::int64_t batches = std::min<std::int64_t>(kBatches, n);
    std::vector<double> total(m, 0.0), running(m, 0.0), batch_sum(m, 0.0), batch_sq(m, 0.0);
    sys.canonicalize(start);
    SkewPoint p = start;
    std::int64_t in_batch = 0, done_batches = 0;
    for (std::int64_t k = 1; k <= n; ++k) {
        for (std::int64_t s = 0; s < period; ++s) {
            if (direction == Direction::Forward) sys.forward(p);
            else sys.backward(p);
        }
        for (std::size_t i = 0; i < m; ++i) running[i] += tests[i](p, d);
        if (++in_batch == batch && done_batches < batches) {
            for (std::size_t i = 0; i < m; ++i) {
                const double bm = running[i] / static_cast<double>(batch);
                batch_sum[i] += bm;
                batch_sq[i] += bm * bm;
                total[i] += running[i];
                running[i] = 0.0;
            }
            in_batch = 0;
            ++done_batches;
        }
    }
    BirkhoffStats out;
    out.mean.resize(m);
    out.std_error.assign(m, 0.0);
    const double b = static_cast<double>(done_batches);
    for (std::size_t i = 0; i < m; ++i) {
        out.mean[i] = (total[i] + running[i]) / static_cast<double>(n);
        if (done_batches > 1) {
            const double mb = batch_sum[i] / b;
            const double var = std::max(0.0, (batch_sq[i] - b * mb * mb) / (b - 1.0));
            out.std_error[i] = std::sqrt(var / b);
        }
    }
    return out;
}

double birkhoff_average(const SkewProductSystem& sys, const TestFunction& phi, SkewPoint start, std::int64_t n,
                        Direction direction, std::int64_t period) {
    return birkhoff_stats(sys, {phi}, start, n, direction, period).mean[0];
}

SkewPoint random_point(std::uint64_t seed, std::uint64_t stream, int dim, double lo, double hi) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    std::mt19937_64 rng(seq);
    SkewPoint p;
    for (int i = 0; i < dim; ++i) p.v.x[i] = rng();
    const double u = static_cast<double>(rng() >> 11) * 0x1p-53;
    p.z = lo + (hi - lo) * u;
    return p;
}

namespace {

struct Component {
    std::string label;
    HeightInterval support;
    bool is_interval = false;
};

std::string height_label(const char* prefix, double a, double b) {
    std::ostringstream s;
    s.precision(6);
    if (a == b) s << prefix << " t=" << a;
    else s << prefix << " [" << a << "," << b << "]";
    return s.str();
}

// Midpoint grid on [0,1)^d.
std::vector<Vec> quadrature_nodes(int dim, int q, double shift) {
    std::vector<Vec> nodes;
    int total = 1;
    for (int i = 0; i < dim; ++i) total *= q;
    for (int code = 0; code < total; ++code) {
        Vec v{};
        int c = code;
        for (int i = 0; i < dim; ++i) {
            v[i] = (c % q + shift) / q;
            c /= q;
        }
        nodes.push_back(v);
    }
    return nodes;
}

// Integral over z in [a,b] of the test function at fixed v.
double z_integral(const TestFunction& t, const Vec& v, double a, double b, int dim) {
    double ph = 0.0;
    for (int i = 0; i < dim; ++i) ph += static_cast<double>(t.base[i]) * v[i];
    if (t.fiber == 0) return (b - a) * (t.phase == Phase::Cos ? std::cos(kTwoPi * ph) : std::sin(kTwoPi * ph));
    const double w = kTwoPi * static_cast<double>(t.fiber);
    const double pa = kTwoPi * ph + w * a, pb = kTwoPi * ph + w * b;
    if (t.phase == Phase::Cos) return (std::sin(pb) - std::sin(pa)) / w;
    return (std::cos(pa) - std::cos(pb)) / w;
}

}  // namespace

DecompositionReport decompose(const SkewProductSystem& sys, const ClassificationReport& report,
                              const std::vector<TestFunction>& tests, const DecomposeOptions& options) {
    if (options.n_orbits < 2) throw DomainError("decompose needs at least 2 orbits per component");
    if (options.quadrature < 1) throw DomainError("quadrature must be positive");
    const int d = sys.dim();
    DecompositionReport out;
    out.tests = tests;
    out.n_orbits = options.n_orbits;
    out.n_iters = options.n_iters;
    out.seed = options.seed;
    const bool rational = report.rotation.rational;
    out.n = report.tag == CaseTag::Accessible ? 1 : report.n;

    std::vector<Component> comps;
    auto add_leaves = [&](const HeightInterval& h) {
        if (h.point()) {
            comps.push_back({height_label("leaf", h.lo, h.lo), h, false});
            return;
        }
        for (double f : {1.0 / 6.0, 0.5, 5.0 / 6.0}) {
            const double t = wrap_unit(h.lo + f * h.length());
            comps.push_back({height_label("leaf", t, t), HeightInterval{t, t}, false});
        }
    };
    if (report.tag == CaseTag::Accessible || (report.tag == CaseTag::JointlyIntegrable && !rational)) {
        comps.push_back({"whole", HeightInterval{0.0, 1.0}, true});
    } else if (report.tag == CaseTag::JointlyIntegrable) {
        const auto m = std::clamp<std::int64_t>(4 * report.rotation.q, 8, 64);
        for (std::int64_t i = 0; i < m; ++i) {
            const double t = (static_cast<double>(i) + 0.5) / static_cast<double>(m);
            comps.push_back({height_label("leaf", t, t), HeightInterval{t, t}, false});
        }
    } else {
        for (const auto& iv : report.u) comps.push_back({height_label("band", iv.lo, iv.hi), iv, true});
        for (const auto& h : report.k) add_leaves(h);
    }

    const auto nodes = quadrature_nodes(d, options.quadrature, 0.5);
    const auto transports = parallel_map<std::shared_ptr<OriginTransport>>(nodes.size(), [&](std::size_t i) {
        return std::make_shared<OriginTransport>(sys, nodes[i], report.options.depth);
    });

    for (std::size_t c = 0; c < comps.size(); ++c) {
        const auto& comp = comps[c];
        const bool whole = comp.is_interval && comp.support.length() >= 1.0;
        const auto runs = parallel_map<BirkhoffStats>(
            static_cast<std::size_t>(options.n_orbits), [&](std::size_t o) {
                SkewPoint p = random_point(options.seed, (static_cast<std::uint64_t>(c) << 32) | o, d);
                if (!whole) {
                    const OriginTransport h(sys, p.v.to_real(d), report.options.depth);
                    if (comp.is_interval) {
                        const double ha = h(comp.support.lo);
                        const double hb = h(comp.support.hi);
                        p.z = ha + p.z * (hb - ha);
                    } else {
                        p.z = h(comp.support.lo);
                    }
                }
                return birkhoff_stats(sys, tests, p, options.n_iters, options.direction, out.n);
            });

        ComponentStats s;
        s.label = comp.label;
        s.support = comp.support;
        s.is_interval = comp.is_interval;
        const std::size_t m = tests.size();
        const double no = static_cast<double>(options.n_orbits);
        s.mean.assign(m, 0.0);
        s.dispersion.assign(m, 0.0);
        s.band.assign(m, 0.0);
        s.integral.assign(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            double sum = 0.0, sq = 0.0;
            for (const auto& r : runs) {
                sum += r.mean[i];
                sq += r.std_error[i] * r.std_error[i];
            }
            s.mean[i] = sum / no;
            double var = 0.0;
            for (const auto& r : runs) var += (r.mean[i] - s.mean[i]) * (r.mean[i] - s.mean[i]);
            s.dispersion[i] = std::sqrt(var / (no - 1.0));
            s.band[i] = std::sqrt(sq / no);
        }
        s.ergodic_signature = true;
        for (std::size_t i = 0; i < m; ++i) {
            if (s.dispersion[i] > 3.0 * s.band[i] + 1e-12) s.ergodic_signature = false;
        }

        // Direct integral: Lebesgue on the band between the two transported boundary leaves,
        // or the transported leaf itself.
        for (std::size_t i = 0; i < m; ++i) {
            double num = 0.0, den = 0.0;
            for (std::size_t k = 0; k < nodes.size(); ++k) {
                const auto& v = nodes[k];
                if (whole) {
                    num += z_integral(tests[i], v, 0.0, 1.0, d);
                    den += 1.0;
                } else if (comp.is_interval) {
                    const double ha = (*transports[k])(comp.support.lo);
                    const double hb = (*transports[k])(comp.support.hi);
                    num += z_integral(tests[i], v, ha, hb, d);
                    den += hb - ha;
                } else {
                    num += tests[i](v, (*transports[k])(comp.support.lo), d);
                    den += 1.0;
                }
            }
            s.integral[i] = num / den;
        }
        out.components.push_back(std::move(s));
    }
    return out;
}

double Projection::operator()(double z) const {
    const double k = std::floor(z);
    const double f = z - k;
    const auto g = heights.size() - 1;
    const double s = f * static_cast<double>(g);
    std::size_t i = static_cast<std::size_t>(s);
    if (i >= g) i = g - 1;
    const double t = s - static_cast<double>(i);
    return k + p[i] + t * (p[i + 1] - p[i]);
}

Projection build_projection(const SkewProductSystem& sys, const ClassificationReport& report, int grid,
                            int quadrature, double shift, int depth) {
    if (report.tag == CaseTag::Accessible) throw DomainError("the accessible case has no us-lamination");
    if (grid < 2 || quadrature < 1) throw DomainError("projection grid and quadrature must be positive");
    if (shift < 0.0 || shift >= 1.0) throw DomainError("quadrature shift must lie in [0,1)");
    const int d = sys.dim();
    const auto nodes = quadrature_nodes(d, quadrature, shift);
    const auto g = static_cast<std::size_t>(grid);
    struct Column {
        std::vector<double> values;
        double tail = 0.0;
    };
    const auto columns = parallel_map<Column>(nodes.size(), [&](std::size_t k) {
        const OriginTransport h(sys, nodes[k], depth);
        Column c;
        c.values.resize(g + 1);
        const double h0 = h(0.0);
        for (std::size_t i = 0; i <= g; ++i) c.values[i] = h(static_cast<double>(i) / grid) - h0;
        c.tail = h.tail_bound();
        return c;
    });
    Projection out;
    out.quadrature = quadrature;
    out.heights.resize(g + 1);
    std::vector<double> nu(g + 1, 0.0);
    for (const auto& c : columns) {
        for (std::size_t i = 0; i <= g; ++i) nu[i] += c.values[i];
        out.tail_bound = std::max(out.tail_bound, c.tail);
    }
    const double count = static_cast<double>(nodes.size());
    out.total_mass = nu[g] / count;
    out.p.resize(g + 1);
    for (std::size_t i = 0; i <= g; ++i) {
        out.heights[i] = static_cast<double>(i) / grid;
        out.p[i] = nu[i] / nu[g];
    }
    for (const auto& h : report.k) {
        if (h.point()) out.lamination_points.push_back(out(h.lo));
    }
    return out;
}

}  // namespace skewlab
