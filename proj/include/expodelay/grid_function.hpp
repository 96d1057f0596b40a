#ifndef EXPODELAY_GRID_FUNCTION_HPP
#define EXPODELAY_GRID_FUNCTION_HPP

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "expodelay/time_grid.hpp"

namespace expodelay {

using cd = std::complex<double>;

// Sampled stand-in for an element of H_{rho,0} tensor C^d.
// Interpreted as zero outside [t_min, t_max].
struct GridFunction {
    TimeGrid grid;
    int dim = 1;
    Eigen::ArrayXXcd samples;  // n rows, dim columns

    GridFunction() : samples(2, 1) { samples.setZero(); }

    GridFunction(TimeGrid g, int d) : grid(g), dim(d), samples(g.n, d) {
        if (d < 1) throw config_error("state dimension must be >= 1");
        samples.setZero();
    }

    GridFunction(TimeGrid g, Eigen::ArrayXXcd s) : grid(g), dim(static_cast<int>(s.cols())), samples(std::move(s)) {
        if (samples.rows() != grid.n || dim < 1) throw config_error("sample array does not match grid");
    }

    static GridFunction zero(const TimeGrid& g, int d = 1) { return GridFunction(g, d); }

    Eigen::VectorXcd at(int64_t j) const { return samples.row(j).matrix().transpose(); }

    // Linear interpolation; zero outside the window.
    Eigen::VectorXcd value(double x) const {
        double dt = grid.dt();
        double pos = (x - grid.t_min) / dt;
        if (pos <= -1e-9) return Eigen::VectorXcd::Zero(dim);
        if (pos >= static_cast<double>(grid.n - 1) + 1e-9) return Eigen::VectorXcd::Zero(dim);
        auto i0 = static_cast<int64_t>(std::floor(pos));
        if (i0 < 0) i0 = 0;
        if (i0 > grid.n - 2) i0 = grid.n - 2;
        double w = pos - static_cast<double>(i0);
        return ((1.0 - w) * samples.row(i0) + w * samples.row(i0 + 1)).matrix().transpose();
    }

    bool finite() const { return samples.allFinite(); }
};

struct Impulse {
    double location;
    Eigen::VectorXcd amplitude;
};

// regular + sum_i delta_{t_i} (x) v_i; the concrete subset of H_{rho,-1} the artifact uses.
struct ImpulsiveFunction {
    GridFunction regular;
    std::vector<Impulse> impulses;

    ImpulsiveFunction() = default;
    ImpulsiveFunction(GridFunction r) : regular(std::move(r)) {}
    ImpulsiveFunction(GridFunction r, std::vector<Impulse> imp)
        : regular(std::move(r)), impulses(std::move(imp)) {
        for (const auto& i : impulses) {
            if (!regular.grid.contains(i.location))
                throw config_error("impulse location outside grid window");
            if (!i.amplitude.allFinite() || i.amplitude.size() != regular.dim)
                throw config_error("impulse amplitude invalid");
        }
    }
};

}

#endif
