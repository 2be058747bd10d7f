#include "skewlab/holonomy.hpp"

#include <algorithm>
#include <cmath>

#include "skewlab/error.hpp"
#include "skewlab/parallel.hpp"

namespace skewlab {

namespace {

constexpr int kTailHeights = 32;
constexpr double kRoundingSafety = 4.0;

const std::vector<InvariantDirection>& bundle(const ToralAutomorphism& a, LeafKind kind) {
    return kind == LeafKind::Stable ? a.stable() : a.unstable();
}

double euclid(const Vec& v, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += v[i] * v[i];
    return std::sqrt(s);
}

// Coefficients of v in the given bundle plus the norm of its component outside the bundle.
std::pair<std::vector<double>, double> split(const ToralAutomorphism& a, LeafKind kind, const Vec& v) {
    const auto c = a.coordinates(v);
    const auto& mine = kind == LeafKind::Stable ? c.stable : c.unstable;
    const auto& other = kind == LeafKind::Stable ? c.unstable : c.stable;
    const auto& other_dirs = kind == LeafKind::Stable ? a.unstable() : a.stable();
    Vec off{};
    for (std::size_t k = 0; k < other.size(); ++k) {
        for (int i = 0; i < a.dim(); ++i) off[i] += other[k] * other_dirs[k].vector[i];
    }
    return {mine, euclid(off, a.dim())};
}

std::vector<double> sample_parallel(int grid, const std::function<double(double)>& f) {
    return parallel_map<double>(static_cast<std::size_t>(grid),
                                [&](std::size_t i) { return f(static_cast<double>(i) / grid); });
}

}  // namespace

Vec BaseLeafPoint::lifted(const ToralAutomorphism& a, LeafKind kind) const {
    const auto& dirs = bundle(a, kind);
    if (direction < 0 || direction >= static_cast<int>(dirs.size())) {
        throw DomainError("leaf direction index " + std::to_string(direction) + " out of range");
    }
    Vec v = anchor.coords;
    for (int i = 0; i < a.dim(); ++i) v[i] += offset * dirs[static_cast<std::size_t>(direction)].vector[i];
    return v;
}

LeafTransport::LeafTransport(const SkewProductSystem& sys, LeafKind kind, const Vec& start, const Vec& displacement,
                             int depth)
    : kind_(kind), depth_(depth) {
    if (depth < 1) throw DomainError("holonomy depth must be at least 1");
    const auto& a = sys.base();
    const int d = a.dim();
    const auto [coef, residual] = split(a, kind, displacement);
    const double size = euclid(displacement, d);
    if (residual > 1e-10 * std::max(1.0, size)) {
        throw DomainError("displacement leaves the " + std::string(kind == LeafKind::Stable ? "stable" : "unstable") +
                          " leaf (off-leaf component " + std::to_string(residual) + ")");
    }
    const auto& dirs = bundle(a, kind);
    const auto& b = sys.bounds();
    const int pieces = std::max(1, static_cast<int>(std::ceil(size - 1e-12)));
    double coef_l1 = 0.0;
    for (double c : coef) coef_l1 += std::abs(c);
    const double delta = coef_l1 / pieces;

    double rate = 0.0;
    double ratio = 0.0;
    if (kind == LeafKind::Stable) {
        rate = a.max_stable_rate();
        ratio = rate / b.min_derivative;
    } else {
        rate = a.min_unstable_rate();
        ratio = b.max_derivative / rate;
    }
    if (!(ratio < 1.0)) {
        throw NumericalError("fiber distortion dominates the base rate; holonomy truncation cannot be certified");
    }
    const double lead = kind == LeafKind::Stable ? b.base_lipschitz * delta / b.min_derivative
                                                 : b.base_lipschitz * delta / rate;
    const double trunc = lead * std::pow(ratio, depth) / (1.0 - ratio);

    for (int p = 0; p < pieces; ++p) {
        Vec s = start;
        for (int i = 0; i < d; ++i) s[i] += displacement[i] * static_cast<double>(p) / pieces;
        DyadicPoint u = DyadicPoint::from_real(s, d);
        Chunk c;
        c.truncation = trunc;
        c.from.reserve(static_cast<std::size_t>(depth));
        c.to.reserve(static_cast<std::size_t>(depth));
        std::vector<double> scale(coef.size());
        for (std::size_t k = 0; k < coef.size(); ++k) scale[k] = coef[k] / pieces;
        for (int n = 0; n < depth; ++n) {
            if (kind == LeafKind::Unstable) {
                u = apply(a.inverse(), u);
                for (std::size_t k = 0; k < coef.size(); ++k) scale[k] /= dirs[k].eigenvalue;
            }
            Vec disp{};
            for (std::size_t k = 0; k < coef.size(); ++k) {
                for (int i = 0; i < d; ++i) disp[i] += scale[k] * dirs[k].vector[i];
            }
            c.from.push_back(sys.fiber_at(u));
            c.to.push_back(sys.fiber_at(u, disp));
            if (kind == LeafKind::Stable) {
                u = apply(a.matrix(), u);
                for (std::size_t k = 0; k < coef.size(); ++k) scale[k] *= dirs[k].eigenvalue;
            }
        }
        chunks_.push_back(std::move(c));
    }
    truncation_bound_ = trunc * pieces;

    for (int j = 0; j < kTailHeights; ++j) {
        double z = (j + 0.5) / kTailHeights;
        double err = 0.0;
        for (const auto& c : chunks_) {
            double jac = 1.0;
            double rounding = 0.0;
            z = eval_chunk(c, z, &jac, &rounding);
            err = err * jac + c.truncation + kRoundingSafety * rounding;
        }
        tail_bound_ = std::max(tail_bound_, err);
    }
}

double LeafTransport::eval_chunk(const Chunk& c, double z, double* jacobian, double* rounding) const {
    const std::size_t n = c.from.size();
    if (!jacobian) {
        if (kind_ == LeafKind::Stable) {
            for (std::size_t k = 0; k < n; ++k) z = c.from[k].map(z);
            for (std::size_t k = n; k-- > 0;) z = c.to[k].inverse(z);
        } else {
            for (std::size_t k = 0; k < n; ++k) z = c.from[k].inverse(z);
            for (std::size_t k = n; k-- > 0;) z = c.to[k].map(z);
        }
        return z;
    }
    // a[k]: derivative of the k-th map along `from`; b[k]: along `to`.
    std::vector<double> a(n), b(n), za(n), zb(n);
    if (kind_ == LeafKind::Stable) {
        for (std::size_t k = 0; k < n; ++k) {
            a[k] = c.from[k].derivative(z);
            z = c.from[k].map(z);
            za[k] = z;
        }
        for (std::size_t k = n; k-- > 0;) {
            z = c.to[k].inverse(z);
            zb[k] = z;
            b[k] = c.to[k].derivative(z);
        }
    } else {
        for (std::size_t k = 0; k < n; ++k) {
            z = c.from[k].inverse(z);
            za[k] = z;
            a[k] = c.from[k].derivative(z);
        }
        for (std::size_t k = n; k-- > 0;) {
            b[k] = c.to[k].derivative(z);
            z = c.to[k].map(z);
            zb[k] = z;
        }
    }
    double prod_a = 1.0, prod_b = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        prod_a *= a[k];
        prod_b *= b[k];
    }
    *jacobian = kind_ == LeafKind::Stable ? prod_a / prod_b : prod_b / prod_a;
    if (rounding) {
        // First-order propagation of one local error per step to the output.
        double est = 0.0;
        if (kind_ == LeafKind::Stable) {
            double suffix_a = 1.0;  // prod a[i], i > k
            for (std::size_t k = n; k-- > 0;) {
                est += 1e-15 * std::max(1.0, std::abs(za[k])) * suffix_a / prod_b;
                suffix_a *= a[k];
            }
            double prefix_b = 1.0;  // prod b[i], i < k
            for (std::size_t k = 0; k < n; ++k) {
                est += kInverseTolerance / prefix_b;
                prefix_b *= b[k];
            }
        } else {
            double suffix_inv = 1.0;  // prod 1/a[i], i > k
            for (std::size_t k = n; k-- > 0;) {
                est += kInverseTolerance * suffix_inv * prod_b;
                suffix_inv /= a[k];
            }
            double prefix_b = 1.0;  // prod b[i], i < k
            for (std::size_t k = 0; k < n; ++k) {
                est += 1e-15 * std::max(1.0, std::abs(zb[k])) * prefix_b;
                prefix_b *= b[k];
            }
        }
        *rounding = est;
    }
    return z;
}

double LeafTransport::operator()(double z) const {
    for (const auto& c : chunks_) z = eval_chunk(c, z, nullptr, nullptr);
    return z;
}

double LeafTransport::derivative(double z) const {
    double j = 1.0;
    for (const auto& c : chunks_) {
        double jc = 1.0;
        z = eval_chunk(c, z, &jc, nullptr);
        j *= jc;
    }
    return j;
}

Vec leaf_displacement(const ToralAutomorphism& a, LeafKind kind, const Vec& from, const Vec& to) {
    const int d = a.dim();
    Vec diff{};
    for (int i = 0; i < d; ++i) diff[i] = to[i] - from[i];
    double best = 1e300;
    Vec best_disp{};
    std::array<int, kMaxDim> n{};
    for (int i = 0; i < d; ++i) n[i] = -2;
    while (true) {
        Vec c = diff;
        for (int i = 0; i < d; ++i) c[i] -= n[i];
        const auto [coef, residual] = split(a, kind, c);
        if (residual < best) {
            best = residual;
            best_disp = Vec{};
            const auto& dirs = bundle(a, kind);
            for (std::size_t k = 0; k < coef.size(); ++k) {
                for (int i = 0; i < d; ++i) best_disp[i] += coef[k] * dirs[k].vector[i];
            }
        }
        int i = 0;
        while (i < d && ++n[i] > 2) n[i++] = -2;
        if (i == d) break;
    }
    if (best > 1e-10) {
        throw DomainError(std::string("points are not on a common ") + (kind == LeafKind::Stable ? "stable" : "unstable") +
                          " leaf (residual " + std::to_string(best) + ")");
    }
    return best_disp;
}

namespace {

HolonomyMap make_holonomy(const SkewProductSystem& sys, LeafKind kind, const BaseLeafPoint& from,
                          const BaseLeafPoint& to, int depth, int grid) {
    if (from.anchor.dim != sys.dim() || to.anchor.dim != sys.dim()) {
        throw DomainError("leaf point dimension differs from the system dimension");
    }
    const Vec a = from.lifted(sys.base(), kind);
    const Vec b = to.lifted(sys.base(), kind);
    const Vec disp = leaf_displacement(sys.base(), kind, a, b);
    HolonomyMap h;
    h.kind = kind;
    h.from = from;
    h.to = to;
    h.truncation_depth = depth;
    auto exact = std::make_shared<LeafTransport>(sys, kind, a, disp, depth);
    h.tail_bound = exact->tail_bound();
    h.transport = MonotoneCircleLift(sample_parallel(grid, [&](double z) { return (*exact)(z); }));
    h.exact = std::move(exact);
    return h;
}

}  // namespace

HolonomyMap stable_holonomy(const SkewProductSystem& sys, const BaseLeafPoint& from, const BaseLeafPoint& to, int depth,
                            int grid) {
    return make_holonomy(sys, LeafKind::Stable, from, to, depth, grid);
}

HolonomyMap unstable_holonomy(const SkewProductSystem& sys, const BaseLeafPoint& from, const BaseLeafPoint& to,
                              int depth, int grid) {
    return make_holonomy(sys, LeafKind::Unstable, from, to, depth, grid);
}

std::array<std::int64_t, kMaxDim> SuLoop::closing_vector(int dim) const {
    Vec sum{};
    for (const auto& leg : legs) {
        for (int i = 0; i < dim; ++i) sum[i] += leg.displacement[i];
    }
    std::array<std::int64_t, kMaxDim> out{};
    for (int i = 0; i < dim; ++i) {
        const double r = std::nearbyint(sum[i]);
        if (std::abs(sum[i] - r) > 1e-10) throw DomainError("su-loop does not close on the torus");
        out[i] = static_cast<std::int64_t>(r);
    }
    return out;
}

SuLoop generator_loop(const ToralAutomorphism& a, int i) {
    const int d = a.dim();
    if (i < 0 || i >= d) throw DomainError("lattice generator index out of range");
    Vec e{};
    e[i] = 1.0;
    const auto c = a.coordinates(e);
    SuLeg s{LeafKind::Stable, {}};
    SuLeg u{LeafKind::Unstable, {}};
    for (std::size_t k = 0; k < c.stable.size(); ++k) {
        for (int j = 0; j < d; ++j) s.displacement[j] -= c.stable[k] * a.stable()[k].vector[j];
    }
    for (std::size_t k = 0; k < c.unstable.size(); ++k) {
        for (int j = 0; j < d; ++j) u.displacement[j] -= c.unstable[k] * a.unstable()[k].vector[j];
    }
    return SuLoop{{s, u}};
}

std::vector<SuLoop> generator_loops(const ToralAutomorphism& a) {
    std::vector<SuLoop> out;
    for (int i = 0; i < a.dim(); ++i) out.push_back(generator_loop(a, i));
    return out;
}

SuLoopMap::SuLoopMap(const SkewProductSystem& sys, const SuLoop& loop, int depth) {
    const int d = sys.dim();
    const auto alpha = loop.closing_vector(d);
    Vec cur{};
    for (int i = 0; i < d; ++i) cur[i] = -static_cast<double>(alpha[i]);
    for (const auto& leg : loop.legs) {
        legs_.emplace_back(sys, leg.kind, cur, leg.displacement, depth);
        for (int i = 0; i < d; ++i) cur[i] += leg.displacement[i];
    }
    for (int j = 0; j < kTailHeights; ++j) {
        double z = (j + 0.5) / kTailHeights;
        double err = 0.0;
        for (const auto& leg : legs_) {
            err = err * leg.derivative(z) + leg.tail_bound();
            z = leg(z);
        }
        tail_bound_ = std::max(tail_bound_, err);
    }
}

double SuLoopMap::operator()(double z) const {
    for (const auto& leg : legs_) z = leg(z);
    return z;
}

double SuLoopMap::derivative(double z) const {
    double j = 1.0;
    for (const auto& leg : legs_) {
        j *= leg.derivative(z);
        z = leg(z);
    }
    return j;
}

MonotoneCircleLift su_loop_map(const SkewProductSystem& sys, const SuLoop& loop, int depth, int grid) {
    const SuLoopMap g(sys, loop, depth);
    return MonotoneCircleLift(sample_parallel(grid, [&](double z) { return g(z); }));
}

double holonomy_derivative(const SkewProductSystem& sys, LeafKind kind, const Vec& from, const Vec& displacement,
                           double z, int depth) {
    return LeafTransport(sys, kind, from, displacement, depth).derivative(z);
}

std::vector<MonotoneCircleLift> accessibility_group(const SkewProductSystem& sys, const std::vector<SuLoop>& generators,
                                                    int depth, int grid) {
    std::vector<MonotoneCircleLift> out;
    for (const auto& g : generators) out.push_back(su_loop_map(sys, g, depth, grid));
    out.push_back(restrict_to_invariant_circle(sys, grid));
    return out;
}

bool HeightInterval::contains(double z, double slack) const {
    double t = z - lo;
    t -= std::floor(t);
    return t <= length() + slack || t >= 1.0 - slack;
}

bool CompactClasses::full_circle() const { return fixed.size() == 1 && fixed[0].length() >= 1.0 - 1e-12; }

bool CompactClasses::contains(double z, double slack) const {
    return std::any_of(fixed.begin(), fixed.end(), [&](const HeightInterval& h) { return h.contains(z, slack); });
}

std::vector<HeightInterval> CompactClasses::complement() const {
    if (fixed.empty()) return {HeightInterval{0.0, 1.0}};
    if (full_circle()) return {};
    std::vector<HeightInterval> out;
    for (std::size_t i = 0; i < fixed.size(); ++i) {
        const auto& a = fixed[i];
        const auto& b = fixed[(i + 1) % fixed.size()];
        const double start = a.hi;
        const double end = b.lo + (i + 1 == fixed.size() ? 1.0 : 0.0);
        if (end - start > 0.0) {
            const double s = start - std::floor(start);
            out.push_back({s, s + (end - start)});
        }
    }
    return out;
}

double su_displacement(const std::vector<SuLoopMap>& maps, double z) {
    double best = 0.0;
    for (const auto& g : maps) best = std::max(best, std::abs(g(z) - z));
    return best;
}

CompactClasses detect_compact_classes(const SkewProductSystem& sys, const std::vector<SuLoop>& generators, int grid,
                                      double tol, int depth) {
    if (grid < 8) throw DomainError("detection grid must have at least 8 points");
    std::vector<SuLoopMap> maps;
    for (const auto& g : generators) maps.emplace_back(sys, g, depth);
    CompactClasses out;
    out.tol = tol;
    for (const auto& m : maps) out.tail_bound = std::max(out.tail_bound, m.tail_bound());

    const auto n = static_cast<std::size_t>(grid);
    const std::size_t ng = maps.size();
    const double h = 1.0 / grid;
    std::vector<double> signed_d(n * ng);
    parallel_for(n, [&](std::size_t i) {
        const double z = static_cast<double>(i) * h;
        for (std::size_t g = 0; g < ng; ++g) signed_d[i * ng + g] = maps[g](z) - z;
    });
    out.heights.resize(n);
    out.displacement.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.heights[i] = static_cast<double>(i) * h;
        double dmax = 0.0;
        for (std::size_t g = 0; g < ng; ++g) dmax = std::max(dmax, std::abs(signed_d[i * ng + g]));
        out.displacement[i] = dmax;
    }
    out.generator_max.assign(ng, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t g = 0; g < ng; ++g) {
            out.generator_max[g] = std::max(out.generator_max[g], std::abs(signed_d[i * ng + g]));
        }
    }
    out.min_displacement = *std::min_element(out.displacement.begin(), out.displacement.end());
    out.max_displacement = *std::max_element(out.displacement.begin(), out.displacement.end());

    enum State { Fixed, Moving, Indeterminate };
    std::vector<State> state(n);
    std::size_t n_indet = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dv = out.displacement[i];
        state[i] = dv < tol ? Fixed : (dv > 10.0 * tol ? Moving : Indeterminate);
        if (state[i] == Indeterminate) ++n_indet;
    }
    out.indeterminate_fraction = static_cast<double>(n_indet) / static_cast<double>(n);

    if (std::all_of(state.begin(), state.end(), [](State s) { return s == Fixed; })) {
        out.fixed.push_back({0.0, 1.0});
        return out;
    }
    auto fixed_at = [&](double z) { return su_displacement(maps, z) < tol; };

    std::size_t start = 0;
    while (state[start] == Fixed) ++start;
    std::vector<HeightInterval> points;
    // Runs of equal state, walked cyclically from a non-fixed sample.
    std::size_t k = 0;
    while (k < n) {
        const std::size_t a = (start + k) % n;
        const State s = state[a];
        std::size_t len = 1;
        while (k + len < n && state[(start + k + len) % n] == s) ++len;
        const double lo = out.heights[a];
        const double hi = lo + static_cast<double>(len - 1) * h;
        if (s == Indeterminate) {
            double blo = lo - 0.5 * h;
            blo -= std::floor(blo);
            out.indeterminate.push_back({blo, blo + static_cast<double>(len) * h});
        } else if (s == Fixed && len == 1) {
            points.push_back({lo, lo});
        } else if (s == Fixed) {
            // Push both ends outward to the tol boundary.
            double in = lo, outside = lo - h;
            for (int it = 0; it < 50; ++it) {
                const double mid = 0.5 * (in + outside);
                (fixed_at(mid) ? in : outside) = mid;
            }
            double rlo = in;
            in = hi;
            outside = hi + h;
            for (int it = 0; it < 50; ++it) {
                const double mid = 0.5 * (in + outside);
                (fixed_at(mid) ? in : outside) = mid;
            }
            const double shift = std::floor(rlo);
            out.fixed.push_back({rlo - shift, in - shift});
        }
        k += len;
    }
    // Common zeros between grid samples: bisect every sign change of every generator.
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        for (std::size_t g = 0; g < ng; ++g) {
            const double da = signed_d[i * ng + g];
            const double db = signed_d[j * ng + g];
            if (!((da < 0 && db > 0) || (da > 0 && db < 0))) continue;
            double lo = out.heights[i];
            double hi = lo + h;
            double dlo = da;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double dm = maps[g](mid) - mid;
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
            double z = 0.5 * (lo + hi);
            z -= std::floor(z);
            if (fixed_at(z)) points.push_back({z, z});
        }
    }
    // Merge points: drop those inside intervals, keep the best representative of each cluster.
    std::sort(points.begin(), points.end(), [](const auto& x, const auto& y) { return x.lo < y.lo; });
    std::vector<HeightInterval> kept;
    for (const auto& p : points) {
        bool inside = false;
        for (const auto& f : out.fixed) inside = inside || f.contains(p.lo, 1e-12);
        if (inside) continue;
        if (!kept.empty()) {
            double gap = std::abs(p.lo - kept.back().lo);
            gap = std::min(gap, 1.0 - gap);
            if (gap < 0.5 * h) {
                if (su_displacement(maps, p.lo) < su_displacement(maps, kept.back().lo)) kept.back() = p;
                continue;
            }
        }
        kept.push_back(p);
    }
    if (kept.size() >= 2) {
        double gap = std::abs(kept.front().lo + 1.0 - kept.back().lo);
        if (gap < 0.5 * h) kept.pop_back();
    }
    out.fixed.insert(out.fixed.end(), kept.begin(), kept.end());
    std::sort(out.fixed.begin(), out.fixed.end(), [](const auto& x, const auto& y) { return x.lo < y.lo; });
    return out;
}

std::string displacement_csv(const CompactClasses& k) { return csv_table(k.heights, k.displacement); }

OriginTransport::OriginTransport(const SkewProductSystem& sys, const Vec& v, int depth) {
    const int d = sys.dim();
    Vec w{};
    for (int i = 0; i < d; ++i) w[i] = wrap_unit(v[i]);
    const auto& a = sys.base();
    const auto c = a.coordinates(w);
    Vec du{}, ds{};
    for (std::size_t k = 0; k < c.unstable.size(); ++k) {
        for (int i = 0; i < d; ++i) du[i] += c.unstable[k] * a.unstable()[k].vector[i];
    }
    for (std::size_t k = 0; k < c.stable.size(); ++k) {
        for (int i = 0; i < d; ++i) ds[i] += c.stable[k] * a.stable()[k].vector[i];
    }
    legs_.emplace_back(sys, LeafKind::Unstable, Vec{}, du, depth);
    legs_.emplace_back(sys, LeafKind::Stable, du, ds, depth);
}

double OriginTransport::operator()(double z) const {
    for (const auto& leg : legs_) z = leg(z);
    return z;
}

double OriginTransport::tail_bound() const {
    double t = 0.0;
    for (const auto& leg : legs_) t += leg.tail_bound();
    return t;
}

}  // namespace skewlab
