#pragma once

// Hand-rolled generators for property tests. Deterministic per seed.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "skewlab/skew_system.hpp"
#include "skewlab/torus.hpp"

namespace gen {

struct Rng {
    std::uint64_t s;
    explicit Rng(std::uint64_t seed) : s(seed * 0x9E3779B97F4A7C15ull + 1) {}

    std::uint64_t next() {
        std::uint64_t z = (s += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    double uniform(double lo = 0.0, double hi = 1.0) { return lo + (hi - lo) * static_cast<double>(next() >> 11) * 0x1p-53; }
    int integer(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }
};

/// Hyperbolic element of SL(2,Z) as a product of positive elementary matrices.
inline skewlab::IntegerMatrix hyperbolic2(Rng& r) {
    using skewlab::IntegerMatrix;
    for (;;) {
        IntegerMatrix m = IntegerMatrix::identity(2);
        const int letters = r.integer(2, 4);
        for (int i = 0; i < letters; ++i) {
            IntegerMatrix e = IntegerMatrix::identity(2);
            if (i % 2 == 0) e(0, 1) = r.integer(1, 2);
            else e(1, 0) = r.integer(1, 2);
            m = m * e;
        }
        if (std::abs(m.trace()) > 2) return m;
    }
}

inline skewlab::Vec point(Rng& r, int dim) {
    skewlab::Vec v{};
    for (int i = 0; i < dim; ++i) v[static_cast<std::size_t>(i)] = r.uniform();
    return v;
}

/// Small trig terms in (x, y, z); the total fiber-derivative budget stays below `budget`.
inline std::vector<skewlab::TrigTerm> fiber_terms(Rng& r, int count, double budget = 0.5) {
    std::vector<skewlab::TrigTerm> out;
    const double per = budget / (2.0 * std::numbers::pi * count * 2.0);
    for (int i = 0; i < count; ++i) {
        skewlab::TrigTerm t;
        t.coefficient = r.uniform(-per, per);
        t.base = {r.integer(-2, 2), r.integer(-2, 2), 0};
        t.fiber = r.integer(0, 2);
        t.phase = r.integer(0, 1) ? skewlab::Phase::Sin : skewlab::Phase::Cos;
        out.push_back(t);
    }
    return out;
}

/// Direct evaluation of z + theta + sum terms at a real base point.
inline double fiber_oracle(double theta, const std::vector<skewlab::TrigTerm>& terms, const skewlab::Vec& v, double z) {
    double s = z + theta;
    for (const auto& t : terms) {
        const double arg = 2.0 * std::numbers::pi *
                           (static_cast<double>(t.base[0]) * v[0] + static_cast<double>(t.base[1]) * v[1] +
                            static_cast<double>(t.base[2]) * v[2] + static_cast<double>(t.fiber) * z);
        s += t.coefficient * (t.phase == skewlab::Phase::Sin ? std::sin(arg) : std::cos(arg));
    }
    return s;
}

inline std::string data(const char* name) { return std::string(SKEWLAB_DATA_DIR) + "/" + name; }

}  // namespace gen
