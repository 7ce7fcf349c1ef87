// Shared helpers for the test suites.
#pragma once

#include <cmath>
#include <vector>

#include "kdc/field.hpp"
#include "kdc/rng.hpp"

namespace kdc::test {

inline DenseField random_field(int h, int w, int c, std::uint64_t seed, double lo = 0.0,
                               double hi = 1.0) {
    Rng rng(seed);
    DenseField f(h, w, c);
    for (float& v : f.raw()) v = static_cast<float>(rng.uniform(lo, hi));
    return f;
}

inline double max_abs_diff(const DenseField& a, const DenseField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.raw().size(); ++i) {
        m = std::max(m, std::abs(static_cast<double>(a.raw()[i]) - b.raw()[i]));
    }
    return m;
}

inline double field_sum(const DenseField& f) {
    double s = 0.0;
    for (float v : f.raw()) s += v;
    return s;
}

}  // namespace kdc::test
