#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "fracwave/errors.hpp"

namespace fracwave {

/// Fractional time order for the wave-type range.  Stores alpha in (1,2)
/// together with the reduced order gamma = alpha - 1 in (0,1) used by the
/// mixed Caputo/Riemann-Liouville machinery.
struct FracOrder {
    double alpha;
    double gamma;

    explicit FracOrder(double a) : alpha(a), gamma(a - 1.0) {
        if (!(a > 1.0) || !(a < 2.0))
            throw DomainError("FracOrder: alpha must lie strictly in (1,2), got " + std::to_string(a));
    }
};

/// Uniform time grid t_i = i*T/M, i = 0..M.
struct TimeGrid {
    double T = 1.0;
    std::size_t M = 0;

    TimeGrid() = default;
    TimeGrid(double T_, std::size_t M_) : T(T_), M(M_) {
        if (!(T > 0.0)) throw DomainError("TimeGrid: T must be positive");
        if (M < 2) throw DomainError("TimeGrid: need at least 2 steps");
    }

    double dt() const { return T / static_cast<double>(M); }
    std::size_t size() const { return M + 1; }
    double node(std::size_t i) const { return (i == M) ? T : dt() * static_cast<double>(i); }

    bool operator==(const TimeGrid& o) const { return T == o.T && M == o.M; }
    bool operator!=(const TimeGrid& o) const { return !(*this == o); }
};

/// Nodal samples on a TimeGrid.
struct TimeSeries {
    TimeGrid grid;
    std::vector<double> v;

    TimeSeries() = default;
    TimeSeries(TimeGrid g, std::vector<double> vals) : grid(g), v(std::move(vals)) {
        if (v.size() != grid.size())
            throw GridMismatch("TimeSeries: " + std::to_string(v.size()) + " values on a grid of size " +
                               std::to_string(grid.size()));
    }
    static TimeSeries zeros(TimeGrid g) { return TimeSeries(g, std::vector<double>(g.size(), 0.0)); }
    static TimeSeries sample(TimeGrid g, const std::function<double(double)>& f) {
        std::vector<double> vals(g.size());
        for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = f(g.node(i));
        return TimeSeries(g, std::move(vals));
    }

    std::size_t size() const { return v.size(); }
    double operator[](std::size_t i) const { return v[i]; }
    double& operator[](std::size_t i) { return v[i]; }
};

inline void require_same_grid(const TimeGrid& a, const TimeGrid& b, const char* where) {
    if (a != b) throw GridMismatch(std::string(where) + ": time grids differ");
}

}  // namespace fracwave
