#ifndef EXPODELAY_ORACLE_HPP
#define EXPODELAY_ORACLE_HPP

#include <functional>
#include <vector>

#include "expodelay/grid_function.hpp"

namespace expodelay {

// Linear delay equation with constant coefficient matrices,
//   u'(t) = sum_i K_i u(t + theta_i) + C u'(t - h1) + f(t),  t > 0,
// prescribed past, and u(0+) = history value at zero. Everything the
// comparison oracle needs and nothing it shares with the operator solver.
struct StepsProblem {
    std::vector<double> thetas;            // all <= 0; 0 means the undelayed term
    std::vector<Eigen::MatrixXcd> coeffs;  // one square matrix per theta
    Eigen::MatrixXcd C;                    // derivative coupling; empty or zero for retarded
    double h1 = 1.0;
    std::function<Eigen::VectorXcd(double)> source;   // may be null
    std::function<Eigen::VectorXcd(double)> history;  // u on t <= 0; may be null for zero
    int dim = 1;
};

// Classical method of steps: march with RK4 at `refine` times the resolution
// of `grid`, reading delayed values from the history for t <= 0 and by cubic
// Hermite interpolation of the already-computed stretch otherwise. The result
// is sampled back onto `grid`, history spliced in for t < 0.
GridFunction method_of_steps(const StepsProblem& p, const TimeGrid& grid, int refine = 10);

}

#endif
