#include "expodelay/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "expodelay/calculus.hpp"
#include "expodelay/errors.hpp"
#include "expodelay/space.hpp"

namespace expodelay {

namespace {

// A few Gaussian bumps per component, supports kept inside the window.
GridFunction random_bumps(const TimeGrid& grid, int dim, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    GridFunction f = GridFunction::zero(grid, dim);
    const double lo = grid.t_min, hi = grid.t_max;
    const double margin = 0.12 * (hi - lo);
    for (int c = 0; c < dim; ++c) {
        for (int b = 0; b < 4; ++b) {
            const double center = lo + margin + (hi - lo - 2 * margin) * U(rng);
            const double width = (hi - lo) * (0.02 + 0.06 * U(rng));
            const cd amp = (2.0 * U(rng) - 1.0) * std::exp(cd(0.0, 2.0 * M_PI * U(rng)));
            for (int64_t j = 0; j < grid.n; ++j) {
                const double s = (grid.t(j) - center) / width;
                f.samples(j, c) += amp * std::exp(-0.5 * s * s);
            }
        }
    }
    return f;
}

double row_norm(const GridFunction& g, int64_t j) {
    return std::sqrt(g.samples.row(j).abs2().sum());
}

Verdict run_agreement_check(const GridMap& W, const ProbeSet& probes, double tol,
                            CutoffSide::Side measure_side) {
    if (!W) throw config_error("agreement check needs a map to test");
    Verdict v;
    v.tolerance = tol;
    v.passed = true;
    for (const ProbePair& p : probes.probes) {
        GridFunction wx = W(p.x);
        GridFunction wy = W(p.y);
        GridFunction d = wx;
        d.samples -= wy.samples;
        const double viol = norm(cutoff(d, {measure_side, p.a}), probes.weight, 0);
        const double scale = 1.0 + norm(wx, probes.weight, 0);
        if (viol > tol * scale) {
            v.passed = false;
            v.witness = Witness{p.x, p.y, p.a, viol};
            return v;
        }
    }
    return v;
}

// Adjoint integral of an impulsive function: the regular part goes through
// adjoint_causal_integrate, each impulse delta_a (x) v contributes its exact
// image s -> e^{2 rho (s-a)} v for s < a and nothing at or after a.
GridFunction adjoint_integral(const ImpulsiveFunction& g, Weight w) {
    GridFunction out = adjoint_causal_integrate(g.regular, w);
    const double dt = out.grid.dt();
    for (const Impulse& imp : g.impulses) {
        for (int64_t j = 0; j < out.grid.n; ++j) {
            const double t = out.grid.t(j);
            if (t < imp.location - dt / 4)
                out.samples.row(j) +=
                    std::exp(2.0 * w.rho * (t - imp.location)) * imp.amplitude.transpose().array();
        }
    }
    return out;
}

}  // namespace

ProbeSet make_probe_set(const TimeGrid& grid, int dim, Weight w, AgreeSide side,
                        std::uint64_t seed) {
    if (dim < 1) throw config_error("probe dimension must be positive");
    ProbeSet set{grid, dim, w, side, seed, {}, {}};
    std::mt19937_64 rng(seed);

    const double dt = grid.dt();
    for (int k = 1; k <= 8; ++k) {
        const double frac = static_cast<double>(k) / 9.0;
        int64_t j = static_cast<int64_t>(frac * static_cast<double>(grid.n - 1));
        j = std::clamp<int64_t>(j, 0, grid.n - 2);
        set.thresholds.push_back(grid.t(j) + dt / 2);  // strictly between nodes
    }
    for (double a : set.thresholds) {
        for (int p = 0; p < 16; ++p) {
            ProbePair pair;
            pair.a = a;
            pair.x = random_bumps(grid, dim, rng);
            GridFunction noise = random_bumps(grid, dim, rng);
            // The difference lives entirely on the non-agreement side of a.
            CutoffSide keep{side == AgreeSide::below ? CutoffSide::above : CutoffSide::below, a};
            GridFunction diff = cutoff(noise, keep);
            pair.y = pair.x;
            pair.y.samples += diff.samples;
            set.probes.push_back(std::move(pair));
        }
    }
    return set;
}

Verdict check_causal(const GridMap& W, const ProbeSet& probes, double tol) {
    if (probes.side != AgreeSide::below)
        throw config_error("causality check needs probes agreeing below their thresholds");
    return run_agreement_check(W, probes, tol, CutoffSide::below);
}

Verdict check_amnesic(const GridMap& W, const ProbeSet& probes, double tol) {
    if (probes.side != AgreeSide::above)
        throw config_error("amnesia check needs probes agreeing above their thresholds");
    return run_agreement_check(W, probes, tol, CutoffSide::above);
}

MemoryClass classify_memory(const RhsOperator& F, Weight w, const ProbeSet& probes,
                            bool* rho_disagreement) {
    if (!F.apply) throw config_error("memory classification needs an operator with apply");
    if (!(w.rho > 0.0)) throw config_error("memory classification needs a positive weight");
    if (F.dim != probes.dim)
        throw config_error("probe dimension does not match the operator dimension");

    const double tol = 1e-8;
    auto composed_at = [&F](Weight ww) {
        return GridMap([&F, ww](const GridFunction& x) {
            return adjoint_integral(F.apply(x), ww);
        });
    };
    Verdict at_w = check_amnesic(composed_at(w), probes, tol);
    Verdict at_alt = check_amnesic(composed_at(Weight(2.0 * w.rho)), probes, tol);
    if (rho_disagreement) *rho_disagreement = (at_w.passed != at_alt.passed);
    return at_w.passed ? MemoryClass::no_delay : MemoryClass::has_delay;
}

Verdict check_autonomous(
    const std::function<GridFunction(const GridFunction&, const GridFunction&)>& F, double h,
    const ProbeSet& probes, double tol) {
    if (!F) throw config_error("autonomy check needs a map to test");
    if (!probes.grid.aligned(h)) throw config_error("autonomy shift must be grid-aligned");
    Verdict v;
    v.tolerance = tol;
    v.passed = true;
    for (const ProbePair& p : probes.probes) {
        GridFunction lhs = F(translate(p.x, h), translate(p.y, h));
        GridFunction rhs = translate(F(p.x, p.y), h);
        const double viol = (lhs.samples - rhs.samples).abs().maxCoeff();
        const double scale = 1.0 + rhs.samples.abs().maxCoeff();
        if (viol > tol * scale) {
            v.passed = false;
            v.witness = Witness{p.x, p.y, h, viol};
            return v;
        }
    }
    return v;
}

Verdict check_rho_independence(const RhsOperator& F, const SolverConfig& cfg, Weight rho1,
                               Weight rho2, double tol) {
    SolverConfig c1 = cfg;
    c1.rho = rho1.rho;
    SolverConfig c2 = cfg;
    c2.rho = rho2.rho;
    GridFunction u1 = picard_solve(F, c1).solution;
    GridFunction u2 = picard_solve(F, c2).solution;

    Verdict v;
    v.tolerance = tol;
    double worst = 0.0;
    double where = cfg.grid.t_min;
    for (int64_t j = 0; j < cfg.grid.n; ++j) {
        const double d = (u1.samples.row(j) - u2.samples.row(j)).abs().maxCoeff();
        if (d > worst) {
            worst = d;
            where = cfg.grid.t(j);
        }
    }
    v.passed = worst <= tol;
    if (!v.passed) v.witness = Witness{u1, u2, where, worst};
    return v;
}

Verdict trace_check(const GridFunction& u, Weight w, double tol) {
    if (!(w.rho > 0.0)) throw config_error("trace bounds need a positive weight");
    const TimeGrid& grid = u.grid;
    const double dt = grid.dt();
    const double n1 = norm(u, w, 1);
    if (!std::isfinite(n1)) throw numeric_error("rho,1 norm of the trace candidate is not finite");

    GridFunction g = u;  // weighted trace e^{-rho t} u
    for (int64_t j = 0; j < grid.n; ++j) g.samples.row(j) *= std::exp(-w.rho * grid.t(j));

    const double slack = tol + 10.0 * dt;
    Verdict v;
    v.tolerance = tol;
    v.passed = true;

    double sup_tr = 0.0;
    double sup_at = grid.t_min;
    for (int64_t j = 0; j < grid.n; ++j) {
        const double r = row_norm(g, j);
        if (r > sup_tr) {
            sup_tr = r;
            sup_at = grid.t(j);
        }
    }
    if (sup_tr > n1 / std::sqrt(2.0 * w.rho) + slack) {
        v.passed = false;
        v.witness = Witness{u, g, sup_at, sup_tr - n1 / std::sqrt(2.0 * w.rho)};
        return v;
    }

    // Hoelder-1/2 quotients over geometrically spaced separations.
    double worst_q = 0.0;
    double worst_at = grid.t_min;
    for (int64_t k = 1; k < grid.n; k = std::max(k + 1, (k * 5) / 4)) {
        const int64_t stride = std::max<int64_t>(1, k / 8);
        for (int64_t j = 0; j + k < grid.n; j += stride) {
            const double num = std::sqrt((g.samples.row(j + k) - g.samples.row(j)).abs2().sum());
            const double q = num / std::sqrt(static_cast<double>(k) * dt);
            if (q > worst_q) {
                worst_q = q;
                worst_at = grid.t(j);
            }
        }
    }
    if (worst_q > n1 + slack) {
        v.passed = false;
        v.witness = Witness{u, g, worst_at, worst_q - n1};
    }
    return v;
}

}
