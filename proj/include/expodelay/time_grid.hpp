#ifndef EXPODELAY_TIME_GRID_HPP
#define EXPODELAY_TIME_GRID_HPP

#include <cmath>
#include <cstdint>

#include "expodelay/errors.hpp"

namespace expodelay {

// Uniform sample times t_j = t_min + j*dt, j = 0..n-1, dt derived from the endpoints.
struct TimeGrid {
    double t_min = 0.0;
    double t_max = 1.0;
    int64_t n = 2;

    TimeGrid() = default;
    TimeGrid(double tmin, double tmax, int64_t count) : t_min(tmin), t_max(tmax), n(count) {
        if (!(std::isfinite(t_min) && std::isfinite(t_max)))
            throw config_error("grid endpoints must be finite");
        if (!(t_min < t_max)) throw config_error("grid needs t_min < t_max");
        if (n < 2) throw config_error("grid needs n >= 2");
    }

    // Nearest n for a requested step; t_max is kept exact, dt rounds to fit.
    static TimeGrid from_step(double tmin, double tmax, double step) {
        if (!(step > 0.0) || !std::isfinite(step)) throw config_error("grid step must be positive");
        double span = tmax - tmin;
        auto count = static_cast<int64_t>(std::llround(span / step)) + 1;
        return TimeGrid(tmin, tmax, count);
    }

    double dt() const { return (t_max - t_min) / static_cast<double>(n - 1); }
    double t(int64_t j) const { return t_min + static_cast<double>(j) * dt(); }

    bool contains(double x) const { return x >= t_min - dt() / 4 && x <= t_max + dt() / 4; }

    // Index of the node at x; requires x grid-aligned within dt/4.
    int64_t index_of(double x) const {
        double pos = (x - t_min) / dt();
        auto j = static_cast<int64_t>(std::llround(pos));
        if (j < 0 || j >= n || std::abs(pos - static_cast<double>(j)) > 0.25)
            throw config_error("time is not a grid node");
        return j;
    }

    bool aligned(double h) const {
        double steps = h / dt();
        return std::abs(steps - std::llround(steps)) <= 0.25;
    }

    bool same(const TimeGrid& o) const {
        double tol = dt() * 1e-9;
        return n == o.n && std::abs(t_min - o.t_min) < tol && std::abs(t_max - o.t_max) < tol;
    }
};

// Exponential weight parameter; rho = 0 is outside the theory.
struct Weight {
    double rho;
    explicit Weight(double r) : rho(r) {
        if (!(std::isfinite(rho)) || rho == 0.0) throw config_error("weight rho must be finite and nonzero");
    }
};

}

#endif
