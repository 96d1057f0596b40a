#ifndef EXPODELAY_SOLVER_HPP
#define EXPODELAY_SOLVER_HPP

#include <functional>

#include "expodelay/grid_function.hpp"

namespace expodelay {

// Which contraction theorem the operator's estimates refer to.
enum class Regime {
    into_minus_one,      // strict contraction with factor < 1 into the dual index
    into_zero,           // Lipschitz constant C, any rho > C works
    into_zero_from_one,  // substitution v = F(integral of v)
};

struct RhsOperator {
    std::function<ImpulsiveFunction(const GridFunction&)> apply;
    double lipschitz = 0.0;
    Regime regime = Regime::into_zero;
    double rho_min = 0.0;
    int dim = 1;
    // How far into the past the operator reads its argument. Builders with
    // delays or memory kernels set this; pointwise maps leave it at zero.
    double memory_horizon = 0.0;
    // Optional sharper theoretical contraction factor at the given rho.
    // Empty means lipschitz/rho for the into-zero regimes, lipschitz otherwise.
    std::function<double(double rho)> contraction_factor;
    // Optional pair form for the substituted regime: called with (integral of
    // the iterate, the iterate itself) so the operator sees the exact
    // derivative instead of reconstructing it. Ignored in the other regimes.
    std::function<ImpulsiveFunction(const GridFunction&, const GridFunction&)> apply_pair;
    // True when apply steps through a discrete transform. Spectral roundoff is
    // amplified by the inverse weight toward t_max, so the solver measures its
    // pointwise stopping clause on the weighted scale for such operators; the
    // unweighted clause would chase noise it can never beat.
    bool spectral_step = false;
};

struct SolverConfig {
    TimeGrid grid;
    double rho = 0.0;  // 0 = choose automatically via pick_rho
    double tol = 1e-10;
    int max_iter = 200;
};

struct SolveReport {
    GridFunction solution;
    int iterations = 0;
    double contraction_estimate = 0.0;  // median of the last 3 increment ratios
    double residual = 0.0;              // fixed-point residual in the rho,0 norm
    double rho_used = 0.0;
};

// Safety-factor-2 weight above the regime's admissibility threshold.
Weight pick_rho(const RhsOperator& F);

// Picard iteration u <- integrate_impulsive(F(u)) from u = 0, with a second
// run from a random start to certify uniqueness of the discrete fixed point.
SolveReport picard_solve(const RhsOperator& F, const SolverConfig& cfg);

// Theoretical continuous-dependence bound on |u - v| given sup |F(x) - G(x)|.
// u and v are the solved fixed points; they are validated, not recomputed.
double dependence_bound(const RhsOperator& F, const RhsOperator& G, const GridFunction& u,
                        const GridFunction& v, Weight w, double sup_diff);

double residual(const GridFunction& u, const RhsOperator& F, Weight w);

}

#endif
