#include "expodelay/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "expodelay/kernels.hpp"

namespace expodelay {

GridFunction causal_integrate(const GridFunction& f, Weight w) {
    if (w.rho <= 0.0) throw config_error("causal_integrate needs rho > 0; use anticausal_integrate");
    GridFunction out(f.grid, f.dim);
    kernels::cumtrapz(f.samples, f.grid.dt(), out.samples, kernels::default_exec());
    return out;
}

GridFunction anticausal_integrate(const GridFunction& f, Weight w) {
    if (w.rho >= 0.0) throw config_error("anticausal_integrate needs rho < 0");
    GridFunction out(f.grid, f.dim);
    // Accumulate from the right so a vanishing right tail gives exact zeros.
    Eigen::ArrayXXcd rev = f.samples.colwise().reverse();
    Eigen::ArrayXXcd tail;
    kernels::cumtrapz(rev, f.grid.dt(), tail, kernels::default_exec());
    out.samples = -tail.colwise().reverse();
    return out;
}

GridFunction derivative(const GridFunction& f) {
    const int64_t n = f.grid.n;
    if (n < 3) throw config_error("derivative needs at least 3 samples");
    const double dt = f.grid.dt();
    GridFunction out(f.grid, f.dim);
    out.samples.row(0) = (-3.0 * f.samples.row(0) + 4.0 * f.samples.row(1) - f.samples.row(2)) / (2.0 * dt);
    for (int64_t j = 1; j + 1 < n; ++j)
        out.samples.row(j) = (f.samples.row(j + 1) - f.samples.row(j - 1)) / (2.0 * dt);
    out.samples.row(n - 1) =
        (3.0 * f.samples.row(n - 1) - 4.0 * f.samples.row(n - 2) + f.samples.row(n - 3)) / (2.0 * dt);
    return out;
}

GridFunction translate(const GridFunction& f, double h) {
    if (h == 0.0) return f;
    const int64_t n = f.grid.n;
    const double dt = f.grid.dt();
    GridFunction out(f.grid, f.dim);
    const double steps = h / dt;
    const auto m = static_cast<int64_t>(std::llround(steps));
    if (std::abs(steps - static_cast<double>(m)) <= 0.25) {
        // Grid-aligned: pure index shift, no interpolation loss.
        for (int64_t j = 0; j < n; ++j) {
            const int64_t src = j + m;
            if (src >= 0 && src < n) out.samples.row(j) = f.samples.row(src);
        }
    } else {
        for (int64_t j = 0; j < n; ++j)
            out.samples.row(j) = f.value(f.grid.t(j) + h).transpose().array();
    }
    return out;
}

GridFunction cutoff(const GridFunction& f, CutoffSide c) {
    GridFunction out = f;
    const double tol = f.grid.dt() / 4;
    for (int64_t j = 0; j < f.grid.n; ++j) {
        const double t = f.grid.t(j);
        const bool zap = (c.side == CutoffSide::below) ? (t > c.threshold + tol)
                                                       : (t < c.threshold - tol);
        if (zap) out.samples.row(j).setZero();
    }
    return out;
}

GridFunction adjoint_causal_integrate(const GridFunction& g, Weight w) {
    if (w.rho <= 0.0) throw config_error("adjoint_causal_integrate needs rho > 0");
    GridFunction out(g.grid, g.dim);
    Eigen::ArrayXXcd weighted, rev_tail;
    kernels::scale_exp(g.samples, g.grid.t_min, g.grid.dt(), -2.0 * w.rho, weighted, kernels::default_exec());
    // Right-anchored accumulation: where the integrand vanishes the tail is an
    // exact zero, so outputs depend only on samples at and beyond each node.
    Eigen::ArrayXXcd rev = weighted.colwise().reverse();
    kernels::cumtrapz(rev, g.grid.dt(), rev_tail, kernels::default_exec());
    Eigen::ArrayXXcd tail = rev_tail.colwise().reverse();
    kernels::scale_exp(tail, g.grid.t_min, g.grid.dt(), 2.0 * w.rho, out.samples, kernels::default_exec());
    if (!out.finite()) throw numeric_error("adjoint integrator overflowed; window too wide for this rho");
    return out;
}

GridFunction integrate_impulsive(const ImpulsiveFunction& F, Weight w) {
    if (w.rho <= 0.0) throw config_error("integrate_impulsive needs rho > 0");
    const GridFunction& reg = F.regular;
    const int64_t n = reg.grid.n;
    const double dt = reg.grid.dt();

    GridFunction out = causal_integrate(reg, w);

    // Patch cells whose right endpoint is an impulse node.
    std::set<int64_t> cells;
    for (const auto& imp : F.impulses) {
        const double pos = (imp.location - reg.grid.t_min) / dt;
        const auto k = static_cast<int64_t>(std::ceil(pos - 0.25));
        if (k >= 1 && k < n) cells.insert(k);
    }
    using RowArr = Eigen::Array<cd, 1, Eigen::Dynamic>;
    for (int64_t k : cells) {
        RowArr standard = 0.5 * dt * (reg.samples.row(k - 1) + reg.samples.row(k));
        RowArr onesided = (k >= 2)
                              ? RowArr(0.5 * dt * (3.0 * reg.samples.row(k - 1) - reg.samples.row(k - 2)))
                              : RowArr(dt * reg.samples.row(k - 1));
        RowArr delta = onesided - standard;
        for (int64_t j = k; j < n; ++j) out.samples.row(j) += delta;
    }

    // Exact steps: the node at the impulse location is included.
    for (const auto& imp : F.impulses) {
        const double pos = (imp.location - reg.grid.t_min) / dt;
        const auto k = static_cast<int64_t>(std::ceil(pos - 0.25));
        for (int64_t j = std::max<int64_t>(k, 0); j < n; ++j)
            out.samples.row(j) += imp.amplitude.transpose().array();
    }
    return out;
}

}
