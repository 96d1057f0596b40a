#include "expodelay/space.hpp"

#include <cmath>

#include "expodelay/calculus.hpp"
#include "expodelay/kernels.hpp"

namespace expodelay {

cd inner_product(const GridFunction& f, const GridFunction& g, Weight w) {
    if (!f.grid.same(g.grid) || f.dim != g.dim)
        throw config_error("inner_product: incompatible grids or dimensions");
    return kernels::weighted_dot(f.samples, g.samples, f.grid.t_min, f.grid.dt(), w.rho,
                                 kernels::default_exec());
}

double norm(const GridFunction& f, Weight w, int k) {
    if (k == 0) {
        double v = inner_product(f, f, w).real();
        return std::sqrt(std::max(v, 0.0));
    }
    if (k != 1) throw config_error("norm: Sobolev index must be 0 or 1");
    GridFunction d = derivative(f);
    d.samples += w.rho * f.samples;
    return norm(d, w, 0);
}

GridFunction resample(const GridFunction& f, const TimeGrid& target) {
    GridFunction out(target, f.dim);
    if (target.same(f.grid)) {
        out.samples = f.samples;
        return out;
    }
    for (int64_t j = 0; j < target.n; ++j)
        out.samples.row(j) = f.value(target.t(j)).transpose().array();
    return out;
}

double sup_abs(const GridFunction& f) {
    return kernels::max_abs(f.samples, kernels::default_exec());
}

}
