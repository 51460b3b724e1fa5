#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace testsupport {

/// Deterministic uniform double in [0, 1) built from the raw mt19937 stream
/// (std::uniform_real_distribution is implementation-defined; this is not).
inline double urand(std::mt19937& g) {
    return static_cast<double>(g()) * (1.0 / 4294967296.0);
}

/// Uniform in [lo, hi).
inline double urand(std::mt19937& g, double lo, double hi) {
    return lo + (hi - lo) * urand(g);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
        double d = a[i] - b[i];
        if (d < 0) d = -d;
        if (d > m) m = d;
    }
    return m;
}

inline double max_abs(const std::vector<double>& a) {
    double m = 0.0;
    for (double x : a) {
        if (x < 0) x = -x;
        if (x > m) m = x;
    }
    return m;
}

}  // namespace testsupport
