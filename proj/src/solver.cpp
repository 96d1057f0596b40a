#include "expodelay/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "expodelay/calculus.hpp"
#include "expodelay/errors.hpp"
#include "expodelay/space.hpp"

namespace expodelay {

namespace {

double median_of_tail(const std::vector<double>& ratios) {
    if (ratios.empty()) return 0.0;
    const std::size_t k = std::min<std::size_t>(3, ratios.size());
    std::vector<double> tail(ratios.end() - static_cast<std::ptrdiff_t>(k), ratios.end());
    std::sort(tail.begin(), tail.end());
    return tail[tail.size() / 2];
}

void check_shape(const ImpulsiveFunction& g, const TimeGrid& grid, int dim) {
    if (!g.regular.grid.same(grid) || g.regular.dim != dim)
        throw config_error("rhs operator returned a function with a different grid or dimension");
}

struct IterationResult {
    GridFunction fixed_point;
    int iterations = 0;
    std::vector<double> ratios;
};

// One Picard run from the given start. Contraction is tracked in the rho,0
// norm, where the theory lives. Convergence additionally requires a small
// relative increment in the sup norm: the integral norm alone cannot see
// narrow churn near single nodes, and the sup clause is weight-free, so every
// admissible weight converges to the same iterate. Operators that step through
// a discrete transform are the exception: their roundoff is amplified by
// e^{rho (t - t_min)} at the right edge and the plain sup would chase noise
// forever, so for them the clause is measured on the weighted scale instead.
IterationResult run_picard(const GridFunction& start,
                           const std::function<GridFunction(const GridFunction&)>& step, Weight w,
                           double tol, int max_iter, bool weighted_sup) {
    IterationResult res;
    GridFunction u = start;
    const Eigen::Index n = u.samples.rows();
    Eigen::ArrayXd sup_weights = Eigen::ArrayXd::Ones(n);
    if (weighted_sup)
        for (Eigen::Index j = 0; j < n; ++j)
            sup_weights[j] = std::exp(-w.rho * (u.grid.t(j) - u.grid.t_min));
    int growth_streak = 0;
    int cycle_streak = 0;
    double prev_inc = -1.0;
    double prev_inc_sup = -1.0;
    for (int k = 1; k <= max_iter; ++k) {
        GridFunction next = step(u);
        if (!next.finite()) throw numeric_error("picard iterate is not finite");
        GridFunction diff = next;
        diff.samples -= u.samples;
        const double inc = norm(diff, w, 0);
        const double scale = norm(next, w, 0);
        if (!std::isfinite(inc) || !std::isfinite(scale))
            throw numeric_error("picard increment norm is not finite");
        res.iterations = k;
        // Ratios are only meaningful while the weighted increment is above
        // the convergence floor; past it they are roundoff noise near 1.
        if (inc > tol * scale) {
            if (prev_inc > 0.0) {
                const double ratio = inc / prev_inc;
                res.ratios.push_back(ratio);
                growth_streak = (ratio >= 1.0) ? growth_streak + 1 : 0;
                if (growth_streak >= 5)
                    throw non_contraction_error(
                        "picard increments grew for 5 consecutive iterations; rho is too small "
                        "for this operator");
            }
        } else {
            growth_streak = 0;
        }
        const double inc_sup = (diff.samples.abs().rowwise().maxCoeff() * sup_weights).maxCoeff();
        const double scale_sup = (next.samples.abs().rowwise().maxCoeff() * sup_weights).maxCoeff();
        u = std::move(next);
        // A bitwise-stationary increment means the map has reached its
        // roundoff attractor (a fixed point or tiny cycle of the
        // floating-point step); iterating further cannot improve the sup. For
        // tolerances below the accumulation floor of the integrator (~n eps)
        // this is where the run legitimately ends.
        cycle_streak = (inc_sup == prev_inc_sup) ? cycle_streak + 1 : 0;
        const bool sup_ok = inc_sup == 0.0 || inc_sup <= tol * scale_sup || cycle_streak >= 5;
        if ((inc == 0.0 || inc <= tol * scale) && sup_ok) {
            res.fixed_point = std::move(u);
            return res;
        }
        prev_inc = inc;
        prev_inc_sup = inc_sup;
    }
    throw numeric_error("picard iteration did not converge within max_iter");
}

GridFunction random_start(const TimeGrid& grid, int dim, double amplitude) {
    std::mt19937_64 rng(0x5eedf1edULL);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    GridFunction g = GridFunction::zero(grid, dim);
    for (int c = 0; c < g.samples.cols(); ++c)
        for (int j = 0; j < g.samples.rows(); ++j)
            g.samples(j, c) = cd(amplitude * dist(rng), amplitude * dist(rng));
    return g;
}

void validate(const RhsOperator& F, const SolverConfig& cfg) {
    if (!F.apply) throw config_error("rhs operator has no apply function");
    if (F.dim < 1) throw config_error("rhs operator dimension must be positive");
    if (!(F.lipschitz >= 0.0) || !std::isfinite(F.lipschitz))
        throw config_error("rhs operator lipschitz constant must be finite and nonnegative");
    if (!(cfg.tol > 0.0)) throw config_error("tol must be positive");
    if (cfg.max_iter < 1) throw config_error("max_iter must be at least 1");
    if (cfg.rho != 0.0) {
        if (!(cfg.rho > 0.0) || !std::isfinite(cfg.rho))
            throw config_error("rho must be positive and finite");
        if (cfg.rho <= F.rho_min)
            throw config_error("rho is below the operator's admissible threshold");
    }
}

}  // namespace

Weight pick_rho(const RhsOperator& F) {
    const double safety = 2.0;
    double base = 0.0;
    switch (F.regime) {
        case Regime::into_minus_one:
            base = std::max(F.rho_min, 1.0);
            break;
        case Regime::into_zero:
        case Regime::into_zero_from_one:
            base = std::max(F.lipschitz, F.rho_min);
            break;
    }
    if (!(base > 0.0)) base = 1.0;
    double rho = safety * base;
    if (F.contraction_factor) {
        // With a sharp predictor available, keep doubling until the predicted
        // factor is comfortably below one.
        int guard = 0;
        while (F.contraction_factor(rho) > 0.5 && ++guard <= 60) rho *= 2.0;
    }
    return Weight(rho);
}

double residual(const GridFunction& u, const RhsOperator& F, Weight w) {
    ImpulsiveFunction g = F.apply(u);
    check_shape(g, u.grid, u.dim);
    GridFunction img = integrate_impulsive(g, w);
    GridFunction diff = u;
    diff.samples -= img.samples;
    return norm(diff, w, 0);
}

SolveReport picard_solve(const RhsOperator& F, const SolverConfig& cfg) {
    validate(F, cfg);
    const Weight w = (cfg.rho != 0.0) ? Weight(cfg.rho) : pick_rho(F);
    const TimeGrid& grid = cfg.grid;
    const int dim = F.dim;

    std::function<GridFunction(const GridFunction&)> step;
    if (F.regime == Regime::into_zero_from_one) {
        // Substituted iteration on v; the solution is the integral of the
        // fixed point. Impulsive right-hand sides have no meaning here.
        step = [&](const GridFunction& v) {
            ImpulsiveFunction g = F.apply_pair ? F.apply_pair(causal_integrate(v, w), v)
                                               : F.apply(causal_integrate(v, w));
            check_shape(g, grid, dim);
            if (!g.impulses.empty())
                throw config_error(
                    "impulsive right-hand side is not supported in the substituted regime");
            return g.regular;
        };
    } else {
        step = [&](const GridFunction& u) {
            ImpulsiveFunction g = F.apply(u);
            check_shape(g, grid, dim);
            return integrate_impulsive(g, w);
        };
    }

    const GridFunction zero = GridFunction::zero(grid, dim);
    IterationResult first = run_picard(zero, step, w, cfg.tol, cfg.max_iter, F.spectral_step);

    // Uniqueness certificate: a second run from a random start must land on
    // the same discrete fixed point.
    const double amp = std::max(1.0, first.fixed_point.samples.abs().maxCoeff());
    IterationResult second =
        run_picard(random_start(grid, dim, amp), step, w, cfg.tol, cfg.max_iter, F.spectral_step);
    {
        GridFunction gap = first.fixed_point;
        gap.samples -= second.fixed_point.samples;
        const double dist = norm(gap, w, 0);
        const double ref = std::max(1.0, norm(first.fixed_point, w, 0));
        if (dist > 10.0 * cfg.tol * ref)
            throw numeric_error("picard runs from different starts reached distinct fixed points");
    }

    SolveReport rep;
    rep.solution = (F.regime == Regime::into_zero_from_one)
                       ? causal_integrate(first.fixed_point, w)
                       : std::move(first.fixed_point);
    rep.iterations = first.iterations;
    rep.contraction_estimate = median_of_tail(first.ratios);
    rep.rho_used = w.rho;
    rep.residual = residual(rep.solution, F, w);
    return rep;
}

double dependence_bound(const RhsOperator& F, const RhsOperator& G, const GridFunction& u,
                        const GridFunction& v, Weight w, double sup_diff) {
    if (F.regime != G.regime)
        throw config_error("dependence bound requires both operators in the same regime");
    if (!u.grid.same(v.grid) || u.dim != v.dim)
        throw config_error("dependence bound requires solutions on the same grid");
    if (!(sup_diff >= 0.0) || !std::isfinite(sup_diff))
        throw config_error("sup_diff must be finite and nonnegative");
    const double avg = 0.5 * (F.lipschitz + G.lipschitz);
    if (F.regime == Regime::into_minus_one) {
        if (!(avg < 1.0))
            throw config_error("averaged contraction factor must stay below 1 for this bound");
        return sup_diff / (1.0 - avg);
    }
    if (!(avg < w.rho))
        throw config_error("averaged lipschitz constant must stay below rho for this bound");
    return sup_diff / (w.rho - avg);
}

}
