#ifndef EXPODELAY_PROBLEMS_HPP
#define EXPODELAY_PROBLEMS_HPP

#include <functional>
#include <vector>

#include "expodelay/fourier_laplace.hpp"
#include "expodelay/grid_function.hpp"
#include "expodelay/solver.hpp"

namespace expodelay {

// Prescribed past of a delay problem. The grid must end at t = 0; the last
// sample is the value carried by the trajectory up to (not at) time zero.
struct HistoryFunction {
    GridFunction past;
    Eigen::VectorXcd value_at_zero_minus;
};

// History with the left limit read off the last sample.
HistoryFunction make_history(const GridFunction& past);

// The trajectory segment t -> u(t + theta), theta in [-depth*dt, 0], viewed as
// a curve of windows. Values before the grid read as zero.
struct PastWindow {
    GridFunction base;
    int64_t depth = 0;

    // (depth+1) x dim matrix of u(t_j + theta), theta increasing to 0.
    Eigen::MatrixXcd at(int64_t j) const;
    // Norm of the window-valued curve: the theta direction carries the plain
    // L2 measure, the t direction the weight.
    double norm(Weight w) const;
};

PastWindow whole_past_lift(const GridFunction& u, int64_t depth);

// Metric projection onto the closed ball B(center, radius). Points inside
// pass through unchanged, bit for bit.
struct BallProjection {
    Eigen::VectorXcd center;
    double radius = 0.0;
    Eigen::VectorXcd operator()(const Eigen::VectorXcd& x) const;
};

using PointwiseMap = std::function<Eigen::VectorXcd(double t, const Eigen::VectorXcd& x)>;

// Superposition operator of a pointwise map with f(t, 0) = 0 and Lipschitz
// constant `lip` in the state, uniformly in t.
RhsOperator nemitzki_rhs(PointwiseMap f, double lip, int dim = 1, double rho_min = 1.0);

// Initial value problem as a fixed-point problem on the whole line: the
// right-hand side is cut off to t >= 0 and a Dirac at 0 carries u0.
RhsOperator ivp_problem(const RhsOperator& F, const Eigen::VectorXcd& u0);

// Continuous-dependence bound for two IVPs with Lipschitz constants lip_f,
// lip_g: |u - v|_{rho,0} <= (sqrt(2 rho) |du0| + 2 sup_diff) / (2 rho - lip_f - lip_g).
double ivp_dependence_bound(double lip_f, double lip_g, Weight w, double du0,
                            double sup_diff);

using DelayMap =
    std::function<Eigen::VectorXcd(double t, const std::vector<Eigen::VectorXcd>& states)>;

// g(t, u(t + theta_1), ..., u(t + theta_N)) with all theta_i <= 0 and g
// Lipschitz with constant `lip` in each state slot.
RhsOperator discrete_delay_rhs(DelayMap g, std::vector<double> thetas, double lip,
                               int dim = 1, double rho_min = 1.0);

using MemoryKernel =
    std::function<Eigen::VectorXcd(double t, double theta, const Eigen::VectorXcd& x)>;

// Integral over the finite memory window [-horizon, 0] of h(t, theta, u(t+theta)),
// with |h(t, theta, x) - h(t, theta, y)| <= L(theta) |x - y| and h(t, theta, 0) = 0.
RhsOperator integro_rhs(MemoryKernel h, std::function<double(double)> L, double horizon,
                        int dim = 1, double rho_min = 1.0);

// Solve u' = Phi(u) for t > 0 with the prescribed past. Phi's declared
// memory_horizon must not exceed the supplied history window. The returned
// solution carries the history for t < 0 and the computed trajectory for
// t >= 0.
SolveReport history_problem(const RhsOperator& phi, const HistoryFunction& hist,
                            const SolverConfig& cfg);

// M o F o N with symbols M, N evaluated at the given weight. F must map into
// the zero space and produce no impulses. Symbol application inside the
// operator runs without the right-edge decay guard: Picard iterates carry
// growing transients that the guard would reject, and causal symbols never
// read the truncated future anyway.
RhsOperator wrapped_rhs(const Symbol& M, const RhsOperator& F, const Symbol& N, Weight w);

// Smallest admissible weight for the difference operator 1 - C tau_{-h1}:
// rho must exceed log(norm C) / h1. Minus infinity when C = 0.
double neutral_minimal_rho(const Eigen::MatrixXcd& C, double h1);

// d/dt (u - C u(. - h1)) = A u + B u(. - h2) + f with zero history, solved
// through the operator calculus for the difference resolvent.
SolveReport neutral_linear_solve(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B,
                                 const Eigen::MatrixXcd& C, double h1, double h2,
                                 const GridFunction& f, const SolverConfig& cfg);

// Strictly increasing change of time; the inverse is optional and is computed
// by bisection when absent. sup_derivative bounds |forward'| from above.
struct Bijection {
    std::function<double(double)> forward;
    std::function<double(double)> inverse;
    double sup_derivative = 1.0;
};

using PairMap = std::function<GridFunction(const GridFunction& x_composed,
                                           const GridFunction& dx_composed)>;

// General neutral right-hand side u'(t) = Phi(u o alpha^{-1}, u' o beta^{-1})(t)
// with alpha(s) >= s, beta(s) >= s + eps0, and Phi Lipschitz in the sum form
// with constant `lip_sum`. The composition maps are precomputed on `grid`.
RhsOperator neutral_general_rhs(PairMap phi, double lip_sum, const Bijection& alpha,
                                const Bijection& beta, double eps0, const TimeGrid& grid,
                                int dim = 1);

struct LocalReport {
    SolveReport report;
    double t_star = 0.0;     // first time the solution leaves B(u0, eta)
    double time_bound = 0.0; // guaranteed containment time 2 rho / lip^2
};

// Local solution via projection: solve the globally Lipschitz problem
// u' = chi_[0,horizon] g(t, P u) with P the projection onto B(u0, eta); the
// solution agrees with the local solution of the original problem up to t_star.
LocalReport local_solve(PointwiseMap g, double eta, double lip,
                        const Eigen::VectorXcd& u0, double horizon,
                        const SolverConfig& cfg);

}

#endif
