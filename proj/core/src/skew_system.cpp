#include "skewlab/skew_system.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "skewlab/circle_maps.hpp"
#include "skewlab/error.hpp"

namespace skewlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double reduce(double a) { return a - std::nearbyint(a); }

double trig(bool is_cos, double turns) {
    const double a = kTwoPi * reduce(turns);
    return is_cos ? std::cos(a) : std::sin(a);
}

double dtrig(bool is_cos, double turns) {
    const double a = kTwoPi * reduce(turns);
    return is_cos ? -std::sin(a) : std::cos(a);
}

double norm2(const std::array<std::int64_t, kMaxDim>& j, int dim) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += static_cast<double>(j[i]) * static_cast<double>(j[i]);
    return std::sqrt(s);
}

struct SumBounds {
    double amplitude = 0.0;
    double min_derivative = 1.0;
    double max_derivative = 1.0;
    double base_lipschitz = 0.0;
    double derivative_base_lipschitz = 0.0;
    double second_derivative = 0.0;  // sup |d^2/dz^2|
    double joint_derivative_lipschitz = 0.0;  // Lipschitz constant of d/dz in (v,z)
};

SumBounds analytic_bounds(const std::vector<TrigTerm>& terms, int dim) {
    SumBounds b;
    double slope = 0.0;
    for (const auto& t : terms) {
        const double c = std::abs(t.coefficient);
        const double l = std::abs(static_cast<double>(t.fiber));
        const double jn = norm2(t.base, dim);
        b.amplitude += c;
        slope += c * kTwoPi * l;
        b.base_lipschitz += c * kTwoPi * jn;
        b.derivative_base_lipschitz += c * kTwoPi * kTwoPi * l * jn;
        b.second_derivative += c * kTwoPi * kTwoPi * l * l;
        b.joint_derivative_lipschitz += c * kTwoPi * kTwoPi * l * std::hypot(l, jn);
    }
    b.min_derivative = 1.0 - slope;
    b.max_derivative = 1.0 + slope;
    return b;
}

std::string describe_point(const Vec& v, double z, int dim) {
    std::ostringstream os;
    os << "(";
    for (int i = 0; i < dim; ++i) os << v[i] << ", ";
    os << "z=" << z << ")";
    return os.str();
}

// Calls fn(v, z) on a uniform grid of [0,1)^{dim+1} with at most ~2^budget_log2 points.
template <class Fn>
void scan_grid(int dim, int grid, int budget_log2, Fn&& fn) {
    const double cap = std::floor(std::pow(2.0, static_cast<double>(budget_log2) / (dim + 1)));
    const int g = std::max(8, std::min(grid, static_cast<int>(cap)));
    std::array<int, kMaxDim> idx{};
    while (true) {
        Vec v{};
        for (int i = 0; i < dim; ++i) v[i] = static_cast<double>(idx[i]) / g;
        for (int k = 0; k < g; ++k) {
            if (!fn(v, static_cast<double>(k) / g, 1.0 / g)) return;
        }
        int i = 0;
        while (i < dim && ++idx[i] == g) idx[i++] = 0;
        if (i == dim) break;
    }
}

void check_terms(const std::vector<TrigTerm>& terms, const char* what) {
    if (terms.size() > kMaxTerms) {
        throw ValidationError(std::string(what) + " has " + std::to_string(terms.size()) + " terms; at most " +
                              std::to_string(kMaxTerms) + " are supported");
    }
    for (const auto& t : terms) {
        if (!std::isfinite(t.coefficient)) throw ValidationError(std::string(what) + " has a non-finite coefficient");
    }
}

}  // namespace

double FiberSum::value(double z) const {
    double s = z + shift_;
    for (std::size_t k = 0; k < n_; ++k) s += c_[k] * trig(cos_[k], phase_[k] + freq_[k] * z);
    return s;
}

double FiberSum::derivative(double z) const {
    double s = 1.0;
    for (std::size_t k = 0; k < n_; ++k) s += c_[k] * kTwoPi * freq_[k] * dtrig(cos_[k], phase_[k] + freq_[k] * z);
    return s;
}

double FiberSum::inverse(double y) const {
    const double guess = y - shift_;
    if (n_ == 0) return guess;
    double lo = guess - amplitude_;
    double hi = guess + amplitude_;
    double z = guess;
    for (int it = 0; it < 100; ++it) {
        const double r = value(z) - y;
        if (r == 0.0) return z;
        if (r > 0) {
            hi = std::min(hi, z);
        } else {
            lo = std::max(lo, z);
        }
        const double d = derivative(z);
        double next = z - r / d;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double step = std::abs(next - z);
        z = next;
        if (step <= 1e-16 * std::max(1.0, std::abs(z)) || hi - lo <= 1e-16 * std::max(1.0, std::abs(z))) break;
    }
    return z;
}

double FiberAt::map(double z) const {
    if (!conjugated_) return phi_.value(z);
    return h_image_.value(phi_.value(h_.inverse(z)));
}

double FiberAt::derivative(double z) const {
    if (!conjugated_) return phi_.derivative(z);
    const double w = h_.inverse(z);
    const double y = phi_.value(w);
    return h_image_.derivative(y) * phi_.derivative(w) / h_.derivative(w);
}

double FiberAt::inverse(double y) const {
    if (!conjugated_) return phi_.inverse(y);
    return h_.value(phi_.inverse(h_image_.inverse(y)));
}

SkewProductSystem::SkewProductSystem(ToralAutomorphism base, IntegerMatrix gluing, FiberMapFamily fiber,
                                     PhaseSpace phase_space)
    : base_(std::move(base)), gluing_(std::move(gluing)), fiber_(std::move(fiber)), phase_space_(phase_space) {
    if (gluing_.dim() != base_.dim()) throw DomainError("gluing dimension differs from the base dimension");
    if (!gluing_.is_unimodular()) throw DomainError("gluing matrix is not unimodular");
    if (!check_commuting(base_.matrix(), gluing_)) {
        throw DomainError("base and gluing matrices do not commute:\n" + base_.matrix().to_rows() + "vs\n" +
                          gluing_.to_rows());
    }
    if (phase_space_ == PhaseSpace::TorusProduct && !gluing_.is_identity()) {
        throw DomainError("a torus product requires the identity gluing");
    }
    if (!std::isfinite(fiber_.theta)) throw ValidationError("theta is not finite");
    fiber_.theta -= std::floor(fiber_.theta);
    if (fiber_.theta >= 1.0) fiber_.theta = 0.0;
    gluing_inverse_ = gluing_.inverse();
    check_terms(fiber_.terms, "fiber");
    check_terms(fiber_.conjugator, "conjugator");
    for (auto t : fiber_.conjugator) {
        t.base = base_.matrix().apply_left(t.base);
        conjugator_image_.push_back(t);
    }
    bounds_ = validate();
}

bool SkewProductSystem::operator==(const SkewProductSystem& rhs) const {
    return base_.matrix() == rhs.base_.matrix() && gluing_ == rhs.gluing_ && fiber_ == rhs.fiber_ &&
           phase_space_ == rhs.phase_space_;
}

void SkewProductSystem::compile_sum(FiberSum& out, const std::vector<TrigTerm>& terms,
                                    const std::vector<TrigTerm>& shifted_terms, bool use_shifted, double theta,
                                    const DyadicPoint* v, const Vec& disp) const {
    const auto& list = use_shifted ? shifted_terms : terms;
    const int d = dim();
    out = FiberSum{};
    out.shift_ = theta;
    for (const auto& t : list) {
        double phase = v ? dyadic_phase(t.base, *v, d) : 0.0;
        for (int i = 0; i < d; ++i) phase += static_cast<double>(t.base[i]) * disp[i];
        const bool is_cos = t.phase == Phase::Cos;
        if (t.fiber == 0) {
            out.shift_ += t.coefficient * trig(is_cos, phase);
            continue;
        }
        const std::size_t k = out.n_++;
        out.c_[k] = t.coefficient;
        out.phase_[k] = reduce(phase);
        out.freq_[k] = static_cast<double>(t.fiber);
        out.cos_[k] = is_cos;
        out.amplitude_ += std::abs(t.coefficient);
    }
}

FiberAt SkewProductSystem::fiber_at(const DyadicPoint& v, const Vec& displacement) const {
    FiberAt f;
    compile_sum(f.phi_, fiber_.terms, fiber_.terms, false, fiber_.theta, &v, displacement);
    if (!fiber_.conjugator.empty()) {
        f.conjugated_ = true;
        compile_sum(f.h_, fiber_.conjugator, fiber_.conjugator, false, 0.0, &v, displacement);
        compile_sum(f.h_image_, fiber_.conjugator, conjugator_image_, true, 0.0, &v, displacement);
    }
    return f;
}

FiberAt SkewProductSystem::fiber_at(const Vec& v) const {
    FiberAt f;
    compile_sum(f.phi_, fiber_.terms, fiber_.terms, false, fiber_.theta, nullptr, v);
    if (!fiber_.conjugator.empty()) {
        f.conjugated_ = true;
        compile_sum(f.h_, fiber_.conjugator, fiber_.conjugator, false, 0.0, nullptr, v);
        compile_sum(f.h_image_, fiber_.conjugator, conjugator_image_, true, 0.0, nullptr, v);
    }
    return f;
}

FiberBounds SkewProductSystem::validate() const {
    const int d = dim();
    // Equivariance under (v,t) ~ (Bv, t-1): phi(Bv, t-1) + 1 = phi(v, t).
    if (phase_space_ == PhaseSpace::MappingTorus && !gluing_.is_identity()) {
        double worst = 0.0;
        Vec where{};
        double where_z = 0.0;
        scan_grid(d, 7, 12, [&](const Vec& v, double z, double) {
            const Vec bv = gluing_.apply(v);
            const double lhs = fiber_at(bv).map(z - 1.0) + 1.0;
            const double rhs = fiber_at(v).map(z);
            if (std::abs(lhs - rhs) > worst) {
                worst = std::abs(lhs - rhs);
                where = v;
                where_z = z;
            }
            return true;
        });
        if (worst > 1e-12) {
            throw ValidationError("fiber family is not equivariant under the gluing; residual " + std::to_string(worst) +
                                  " at " + describe_point(where, where_z, d));
        }
    }

    auto margin_scan = [&](const char* what, auto&& deriv, double joint_lipschitz) {
        double worst = 1e300;
        Vec where{};
        double where_z = 0.0;
        double cell = 0.0;
        scan_grid(d, kValidationGrid, fiber_.conjugator.empty() ? 22 : 20, [&](const Vec& v, double z, double h) {
            const double dz = deriv(v, z);
            cell = h;
            if (dz < worst) {
                worst = dz;
                where = v;
                where_z = z;
            }
            return true;
        });
        if (worst <= kDerivativeMargin) {
            throw ValidationError(std::string(what) + " derivative " + std::to_string(worst) + " is below the margin " +
                                  std::to_string(kDerivativeMargin) + " at grid point " +
                                  describe_point(where, where_z, d));
        }
        // grid minimum minus the variation possible inside one cell
        return worst - joint_lipschitz * cell * std::sqrt(static_cast<double>(d + 1));
    };

    const auto phi = analytic_bounds(fiber_.terms, d);
    double phi_min = phi.min_derivative;
    if (phi_min <= kDerivativeMargin) {
        phi_min = margin_scan(
            "fiber", [&](const Vec& v, double z) { return fiber_at(v).phi_.derivative(z); },
            phi.joint_derivative_lipschitz);
        phi_min = std::max(phi_min, 1e-3);
    }
    FiberBounds b;
    if (fiber_.conjugator.empty()) {
        b.amplitude = phi.amplitude;
        b.min_derivative = phi_min;
        b.max_derivative = phi.max_derivative;
        b.base_lipschitz = phi.base_lipschitz;
        b.derivative_base_lipschitz = phi.derivative_base_lipschitz;
        return b;
    }

    const auto h = analytic_bounds(fiber_.conjugator, d);
    double h_min = h.min_derivative;
    if (h_min <= kDerivativeMargin) {
        h_min = margin_scan(
            "conjugator", [&](const Vec& v, double z) { return fiber_at(v).h_.derivative(z); },
            h.joint_derivative_lipschitz);
        h_min = std::max(h_min, 1e-3);
    }
    // Composite h_{Av} o phi_v o h_v^{-1}: every derivative must clear the margin on the grid.
    double sup_base = 0.0;
    double sup_dbase = 0.0;
    double composite_min = 1e300;
    double composite_max = 0.0;
    const double eps = 1e-6;
    scan_grid(d, kValidationGrid, 18, [&](const Vec& v, double z, double) {
        const auto f = fiber_at(v);
        const double dz = f.derivative(z);
        composite_min = std::min(composite_min, dz);
        composite_max = std::max(composite_max, dz);
        for (int i = 0; i < d; ++i) {
            Vec vp = v;
            Vec vm = v;
            vp[i] += eps;
            vm[i] -= eps;
            const auto fp = fiber_at(vp);
            const auto fm = fiber_at(vm);
            sup_base = std::max(sup_base, std::abs(fp.map(z) - fm.map(z)) / (2 * eps));
            sup_dbase = std::max(sup_dbase, std::abs(fp.derivative(z) - fm.derivative(z)) / (2 * eps));
        }
        if (dz <= kDerivativeMargin) {
            throw ValidationError("conjugated fiber derivative " + std::to_string(dz) + " is below the margin at " +
                                  describe_point(v, z, d));
        }
        return true;
    });
    // Analytic composite bounds; sampled Lipschitz constants are inflated by sqrt(d) (gradient norm) and 1.25.
    b.amplitude = phi.amplitude + 2.0 * h.amplitude;
    b.min_derivative = std::max(h_min * phi_min / h.max_derivative, 0.9 * composite_min);
    b.max_derivative = std::min(h.max_derivative * phi.max_derivative / h_min, 1.1 * composite_max);
    b.base_lipschitz = 1.25 * std::sqrt(static_cast<double>(d)) * sup_base;
    b.derivative_base_lipschitz = 1.25 * std::sqrt(static_cast<double>(d)) * sup_dbase;
    return b;
}

void SkewProductSystem::canonicalize(SkewPoint& p) const {
    double k = std::floor(p.z);
    p.z -= k;
    if (p.z >= 1.0) {
        p.z = 0.0;
        k += 1.0;
    }
    if (k == 0.0 || phase_space_ == PhaseSpace::TorusProduct || gluing_.is_identity()) return;
    if (std::abs(k) > 64) throw NumericalError("fiber coordinate left the fundamental domain by more than 64 turns");
    const IntegerMatrix& m = k > 0 ? gluing_ : gluing_inverse_;
    for (int i = 0; i < static_cast<int>(std::abs(k)); ++i) p.v = apply(m, p.v);
}

void SkewProductSystem::forward(SkewPoint& p) const {
    p.z = fiber_at(p.v).map(p.z);
    p.v = apply(base_.matrix(), p.v);
    canonicalize(p);
}

void SkewProductSystem::backward(SkewPoint& p) const {
    p.v = apply(base_.inverse(), p.v);
    p.z = fiber_at(p.v).inverse(p.z);
    canonicalize(p);
}

SkewProductSystem make_prototype(const ToralAutomorphism& a, const IntegerMatrix& b) {
    return SkewProductSystem(a, b, FiberMapFamily{}, PhaseSpace::MappingTorus);
}

SkewProductSystem make_prototype(const IntegerMatrix& a, const IntegerMatrix& b) {
    if (!check_commuting(a, b)) throw DomainError("base and gluing matrices do not commute");
    return make_prototype(ToralAutomorphism(a), b);
}

Perturbation Perturbation::rotation(double theta) {
    Perturbation p;
    p.kind = Kind::Rotation;
    p.theta = theta;
    return p;
}

Perturbation Perturbation::fiber_shear(std::vector<TrigTerm> terms) {
    Perturbation p;
    p.kind = Kind::FiberShear;
    p.terms = std::move(terms);
    return p;
}

Perturbation Perturbation::localized(std::vector<TrigTerm> terms, std::vector<TrigTerm> window) {
    Perturbation p;
    p.kind = Kind::Localized;
    p.terms = std::move(terms);
    p.window = std::move(window);
    return p;
}

Perturbation Perturbation::conjugate(std::vector<TrigTerm> terms) {
    Perturbation p;
    p.kind = Kind::Conjugate;
    p.terms = std::move(terms);
    return p;
}

std::vector<TrigTerm> multiply_terms(const std::vector<TrigTerm>& a, const std::vector<TrigTerm>& b) {
    std::vector<TrigTerm> out;
    auto add = [&](double c, const TrigTerm& x, const TrigTerm& y, int sign, Phase phase) {
        TrigTerm t;
        t.coefficient = c;
        for (int i = 0; i < kMaxDim; ++i) t.base[i] = x.base[i] + sign * y.base[i];
        t.fiber = x.fiber + sign * y.fiber;
        t.phase = phase;
        // merge with an existing identical frequency/phase
        for (auto& e : out) {
            if (e.base == t.base && e.fiber == t.fiber && e.phase == t.phase) {
                e.coefficient += t.coefficient;
                return;
            }
        }
        out.push_back(t);
    };
    for (const auto& x : a) {
        for (const auto& y : b) {
            const double h = 0.5 * x.coefficient * y.coefficient;
            const bool xs = x.phase == Phase::Sin;
            const bool ys = y.phase == Phase::Sin;
            if (xs && ys) {  // sin a sin b = (cos(a-b) - cos(a+b)) / 2
                add(h, x, y, -1, Phase::Cos);
                add(-h, x, y, +1, Phase::Cos);
            } else if (xs && !ys) {  // sin a cos b = (sin(a+b) + sin(a-b)) / 2
                add(h, x, y, +1, Phase::Sin);
                add(h, x, y, -1, Phase::Sin);
            } else if (!xs && ys) {  // cos a sin b = (sin(a+b) - sin(a-b)) / 2
                add(h, x, y, +1, Phase::Sin);
                add(-h, x, y, -1, Phase::Sin);
            } else {  // cos a cos b = (cos(a-b) + cos(a+b)) / 2
                add(h, x, y, -1, Phase::Cos);
                add(h, x, y, +1, Phase::Cos);
            }
        }
    }
    // Drop vanishing terms: zero coefficients and sin of the zero frequency.
    std::erase_if(out, [](const TrigTerm& t) {
        const bool zero_freq = t.fiber == 0 && t.base == std::array<std::int64_t, kMaxDim>{};
        return t.coefficient == 0.0 || (zero_freq && t.phase == Phase::Sin);
    });
    return out;
}

SkewProductSystem perturb(const SkewProductSystem& sys, const Perturbation& method) {
    FiberMapFamily fam = sys.fiber();
    switch (method.kind) {
        case Perturbation::Kind::Rotation:
            if (method.theta == 0.0) return sys;
            fam.theta += method.theta;
            break;
        case Perturbation::Kind::FiberShear:
            fam.terms.insert(fam.terms.end(), method.terms.begin(), method.terms.end());
            break;
        case Perturbation::Kind::Localized: {
            for (const auto& w : method.window) {
                if (w.base != std::array<std::int64_t, kMaxDim>{}) {
                    throw DomainError("localization window must depend on the fiber coordinate only");
                }
            }
            const auto product = multiply_terms(method.terms, method.window);
            fam.terms.insert(fam.terms.end(), product.begin(), product.end());
            break;
        }
        case Perturbation::Kind::Conjugate:
            if (!fam.conjugator.empty()) {
                throw UnsupportedError("system is already conjugated; nested conjugators are not representable");
            }
            fam.conjugator = method.terms;
            break;
    }
    return SkewProductSystem(sys.base(), sys.gluing(), std::move(fam), sys.phase_space());
}

SkewPoint step(const SkewProductSystem& sys, SkewPoint p, std::int64_t n) {
    if (n > kMaxSteps || n < -kMaxSteps) throw DomainError("step count exceeds the configured maximum");
    sys.canonicalize(p);
    if (n >= 0) {
        for (std::int64_t i = 0; i < n; ++i) sys.forward(p);
    } else {
        for (std::int64_t i = 0; i < -n; ++i) sys.backward(p);
    }
    return p;
}

MappingTorusPoint step(const SkewProductSystem& sys, const MappingTorusPoint& p, std::int64_t n) {
    if (p.base.dim != sys.dim()) throw DomainError("point dimension differs from the system dimension");
    SkewPoint q{DyadicPoint::from_real(p.base.coords, sys.dim()), p.height};
    q = step(sys, q, n);
    return MappingTorusPoint{TorusPoint{sys.dim(), q.v.to_real(sys.dim())}, q.z};
}

MonotoneCircleLift restrict_to_invariant_circle(const SkewProductSystem& sys, int grid) {
    const auto f = sys.fiber_at(DyadicPoint{});
    return MonotoneCircleLift::from_function([&](double z) { return f.map(z); }, grid);
}

double eval_term(const TrigTerm& t, const Vec& v, double z, int dim) {
    double phase = static_cast<double>(t.fiber) * z;
    for (int i = 0; i < dim; ++i) phase += static_cast<double>(t.base[i]) * v[i];
    return t.coefficient * trig(t.phase == Phase::Cos, phase);
}

// ---------------------------------------------------------------------------
// System files

namespace {

std::string trim(std::string_view s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string_view::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return std::string(s.substr(a, b - a + 1));
}

double parse_real(const std::string& s, int line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line) + ": bad number '" + s + "'");
    }
}

TrigTerm parse_term(const std::string& text, int dim, int line) {
    std::istringstream is(text);
    std::vector<std::string> tok;
    for (std::string t; is >> t;) tok.push_back(t);
    if (static_cast<int>(tok.size()) != dim + 3) {
        throw ParseError("line " + std::to_string(line) + ": expected '<coeff> sin|cos' and " +
                         std::to_string(dim + 1) + " integer frequencies");
    }
    TrigTerm t;
    t.coefficient = parse_real(tok[0], line);
    if (tok[1] == "sin") {
        t.phase = Phase::Sin;
    } else if (tok[1] == "cos") {
        t.phase = Phase::Cos;
    } else {
        throw ParseError("line " + std::to_string(line) + ": expected sin or cos, got '" + tok[1] + "'");
    }
    for (int i = 0; i <= dim; ++i) {
        std::int64_t f = 0;
        try {
            std::size_t used = 0;
            f = std::stoll(tok[static_cast<std::size_t>(i + 2)], &used);
            if (used != tok[static_cast<std::size_t>(i + 2)].size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw ParseError("line " + std::to_string(line) + ": bad frequency '" + tok[static_cast<std::size_t>(i + 2)] +
                             "'");
        }
        if (i < dim) {
            t.base[static_cast<std::size_t>(i)] = f;
        } else {
            t.fiber = f;
        }
    }
    return t;
}

void print_terms(std::string& out, const std::vector<TrigTerm>& terms, int dim) {
    char buf[64];
    for (const auto& t : terms) {
        std::snprintf(buf, sizeof buf, "%.17g", t.coefficient);
        out += buf;
        out += t.phase == Phase::Sin ? " sin" : " cos";
        for (int i = 0; i < dim; ++i) out += " " + std::to_string(t.base[static_cast<std::size_t>(i)]);
        out += " " + std::to_string(t.fiber) + "\n";
    }
}

}  // namespace

SkewProductSystem parse_system(std::string_view text) {
    std::string section;
    std::string base_rows, gluing_rows;
    std::vector<std::pair<int, std::string>> fiber_lines, conj_lines;
    bool has_gluing = false;
    bool has_base = false;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError("line " + std::to_string(line_no) + ": bad section header");
            section = line.substr(1, line.size() - 2);
            if (section == "gluing") has_gluing = true;
            if (section == "base") has_base = true;
            if (section != "base" && section != "gluing" && section != "fiber" && section != "conjugator") {
                throw ParseError("line " + std::to_string(line_no) + ": unknown section [" + section + "]");
            }
            continue;
        }
        if (section == "base") {
            base_rows += line + "\n";
        } else if (section == "gluing") {
            gluing_rows += line + "\n";
        } else if (section == "fiber") {
            fiber_lines.emplace_back(line_no, line);
        } else if (section == "conjugator") {
            conj_lines.emplace_back(line_no, line);
        } else {
            throw ParseError("line " + std::to_string(line_no) + ": content outside a section");
        }
    }
    if (!has_base) throw ParseError("missing [base] section");
    const IntegerMatrix a = parse_matrix(base_rows);
    const IntegerMatrix b = has_gluing ? parse_matrix(gluing_rows) : IntegerMatrix::identity(a.dim());
    if (b.dim() != a.dim()) throw ParseError("[gluing] dimension differs from [base]");
    FiberMapFamily fam;
    for (const auto& [ln, l] : fiber_lines) {
        if (l.rfind("theta", 0) == 0) {
            fam.theta = parse_real(trim(l.substr(5)), ln);
        } else {
            fam.terms.push_back(parse_term(l, a.dim(), ln));
        }
    }
    for (const auto& [ln, l] : conj_lines) fam.conjugator.push_back(parse_term(l, a.dim(), ln));
    return SkewProductSystem(ToralAutomorphism(a), b, std::move(fam),
                             has_gluing ? PhaseSpace::MappingTorus : PhaseSpace::TorusProduct);
}

SkewProductSystem load_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open system file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_system(ss.str());
}

std::string print_system(const SkewProductSystem& sys) {
    std::string out = "[base]\n" + sys.base().matrix().to_rows();
    if (sys.phase_space() == PhaseSpace::MappingTorus) out += "[gluing]\n" + sys.gluing().to_rows();
    char buf[64];
    std::snprintf(buf, sizeof buf, "theta %.17g\n", sys.fiber().theta);
    out += "[fiber]\n";
    out += buf;
    print_terms(out, sys.fiber().terms, sys.dim());
    if (!sys.fiber().conjugator.empty()) {
        out += "[conjugator]\n";
        print_terms(out, sys.fiber().conjugator, sys.dim());
    }
    return out;
}

}  // namespace skewlab
