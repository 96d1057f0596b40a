#include "expodelay/problems.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <utility>

#include "expodelay/calculus.hpp"
#include "expodelay/kernels.hpp"
#include "expodelay/space.hpp"

namespace expodelay {

namespace {

double spectral_norm(const Eigen::MatrixXcd& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues()(0);
}

// Integral of L(theta) e^{rho theta} over [-horizon, 0] on a fixed quadrature,
// independent of any solve grid.
double weighted_kernel_mass(const std::function<double(double)>& L, double horizon,
                            double rho) {
    const int m = 2000;
    const double dth = horizon / m;
    double s = 0.0;
    for (int i = 0; i <= m; ++i) {
        const double th = -horizon + i * dth;
        const double v = L(th);
        if (!(v >= 0.0) || !std::isfinite(v))
            throw config_error("kernel bound L must be finite and >= 0");
        const double wq = (i == 0 || i == m) ? 0.5 : 1.0;
        s += wq * v * std::exp(rho * th) * dth;
    }
    return s;
}

// Preimage of target under an increasing map with fwd(s) >= s, so the root
// lies at or below target.
double invert_increasing(const std::function<double(double)>& fwd, double target) {
    double hi = target;
    double lo = target - 1.0;
    int guard = 0;
    while (fwd(lo) > target) {
        lo = target - 2.0 * (target - lo);
        if (++guard > 200) throw config_error("time change could not be inverted");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (fwd(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}

HistoryFunction make_history(const GridFunction& past) {
    if (std::abs(past.grid.t_max) > past.grid.dt() / 4.0)
        throw config_error("history grid must end at time zero");
    HistoryFunction h;
    h.past = past;
    h.value_at_zero_minus = past.at(past.grid.n - 1);
    return h;
}

Eigen::MatrixXcd PastWindow::at(int64_t j) const {
    if (j < 0 || j >= base.grid.n) throw config_error("window index outside the grid");
    Eigen::MatrixXcd m(depth + 1, base.dim);
    m.setZero();
    for (int64_t i = 0; i <= depth; ++i) {
        const int64_t src = j - depth + i;
        if (src >= 0) m.row(i) = base.samples.row(src).matrix();
    }
    return m;
}

double PastWindow::norm(Weight w) const {
    const TimeGrid& g = base.grid;
    const double dt = g.dt();
    // V(t) = integral of |u|^2 over [t - depth dt, t] via one prefix pass.
    Eigen::ArrayXXcd p(g.n, 1);
    p.col(0) = base.samples.abs2().rowwise().sum().cast<cd>();
    Eigen::ArrayXXcd S(g.n, 1);
    kernels::cumtrapz(p, dt, S, kernels::default_exec());
    double acc = 0.0;
    for (int64_t j = 0; j < g.n; ++j) {
        const double head = S(j, 0).real();
        const double tail = (j >= depth) ? S(j - depth, 0).real() : 0.0;
        const double wq = (j == 0 || j == g.n - 1) ? 0.5 : 1.0;
        acc += wq * std::exp(-2.0 * w.rho * g.t(j)) * (head - tail) * dt;
    }
    return std::sqrt(std::max(acc, 0.0));
}

PastWindow whole_past_lift(const GridFunction& u, int64_t depth) {
    if (depth < 1 || depth >= u.grid.n)
        throw config_error("window depth must fit inside the grid");
    return PastWindow{u, depth};
}

Eigen::VectorXcd BallProjection::operator()(const Eigen::VectorXcd& x) const {
    if (!(radius > 0.0)) throw config_error("projection radius must be positive");
    if (x.size() != center.size()) throw config_error("projection dimension mismatch");
    Eigen::VectorXcd d = x - center;
    const double r = d.norm();
    if (r <= radius) return x;
    return center + (radius / r) * d;
}

RhsOperator nemitzki_rhs(PointwiseMap f, double lip, int dim, double rho_min) {
    if (!f) throw config_error("superposition map must be set");
    if (!(lip >= 0.0) || !std::isfinite(lip))
        throw config_error("lipschitz constant must be finite and >= 0");
    if (dim < 1) throw config_error("state dimension must be >= 1");
    if (!(rho_min >= 0.0) || !std::isfinite(rho_min))
        throw config_error("rho_min must be finite and >= 0");
    RhsOperator F;
    F.dim = dim;
    F.lipschitz = lip;
    F.regime = Regime::into_zero;
    F.rho_min = rho_min;
    F.apply = [f = std::move(f), dim](const GridFunction& u) {
        if (u.dim != dim) throw config_error("state dimension mismatch in superposition map");
        GridFunction out(u.grid, dim);
        for (int64_t j = 0; j < u.grid.n; ++j) {
            Eigen::VectorXcd y = f(u.grid.t(j), u.at(j));
            if (y.size() != dim)
                throw config_error("superposition map returned the wrong dimension");
            out.samples.row(j) = y.transpose().array();
        }
        return ImpulsiveFunction(std::move(out));
    };
    return F;
}

RhsOperator ivp_problem(const RhsOperator& F, const Eigen::VectorXcd& u0) {
    if (!F.apply) throw config_error("ivp needs a right-hand side with apply set");
    if (F.regime == Regime::into_zero_from_one)
        throw config_error("ivp formulation needs a right-hand side into the zero space");
    if (u0.size() != F.dim) throw config_error("initial value dimension mismatch");
    if (!u0.allFinite()) throw config_error("initial value must be finite");
    RhsOperator G = F;
    G.apply_pair = {};
    auto base = F.apply;
    Eigen::VectorXcd a0 = u0;
    G.apply = [base, a0](const GridFunction& u) {
        if (!u.grid.contains(0.0)) throw config_error("ivp grid must contain time zero");
        ImpulsiveFunction g = base(u);
        GridFunction masked = cutoff(g.regular, {CutoffSide::above, 0.0});
        std::vector<Impulse> imps;
        const double guard = u.grid.dt() / 4.0;
        for (const auto& imp : g.impulses)
            if (imp.location >= -guard) imps.push_back(imp);
        imps.push_back({0.0, a0});
        return ImpulsiveFunction(std::move(masked), std::move(imps));
    };
    return G;
}

double ivp_dependence_bound(double lip_f, double lip_g, Weight w, double du0,
                            double sup_diff) {
    if (!(lip_f >= 0.0) || !(lip_g >= 0.0) || !std::isfinite(lip_f + lip_g))
        throw config_error("lipschitz constants must be finite and >= 0");
    if (!(du0 >= 0.0) || !(sup_diff >= 0.0) || !std::isfinite(du0 + sup_diff))
        throw config_error("deviations must be finite and >= 0");
    if (!(w.rho > 0.0)) throw config_error("dependence bound needs rho > 0");
    const double gap = 2.0 * w.rho - (lip_f + lip_g);
    if (!(gap > 0.0))
        throw config_error("dependence bound needs 2 rho above the summed lipschitz constants");
    return (std::sqrt(2.0 * w.rho) * du0 + 2.0 * sup_diff) / gap;
}

RhsOperator discrete_delay_rhs(DelayMap g, std::vector<double> thetas, double lip,
                               int dim, double rho_min) {
    if (!g) throw config_error("delay map must be set");
    if (thetas.empty()) throw config_error("delay offsets must not be empty");
    for (double th : thetas) {
        if (!std::isfinite(th) || th > 0.0)
            throw config_error("delay offsets must be finite and <= 0");
    }
    std::vector<double> sorted = thetas;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw config_error("delay offsets must be distinct");
    if (!(lip >= 0.0) || !std::isfinite(lip))
        throw config_error("lipschitz constant must be finite and >= 0");
    if (dim < 1) throw config_error("state dimension must be >= 1");
    if (!(rho_min >= 0.0) || !std::isfinite(rho_min))
        throw config_error("rho_min must be finite and >= 0");

    RhsOperator F;
    F.dim = dim;
    F.regime = Regime::into_zero;
    F.lipschitz = lip * static_cast<double>(thetas.size());
    F.rho_min = rho_min;
    F.memory_horizon = -sorted.front();
    F.contraction_factor = [lip, thetas](double rho) {
        double s = 0.0;
        for (double th : thetas) s += std::exp(rho * th);
        return lip * s / rho;
    };
    F.apply = [g = std::move(g), thetas, dim](const GridFunction& u) {
        if (u.dim != dim) throw config_error("state dimension mismatch in delay map");
        std::vector<GridFunction> shifted;
        shifted.reserve(thetas.size());
        for (double th : thetas) shifted.push_back(translate(u, th));
        GridFunction out(u.grid, dim);
        std::vector<Eigen::VectorXcd> states(thetas.size());
        for (int64_t j = 0; j < u.grid.n; ++j) {
            for (size_t i = 0; i < thetas.size(); ++i) states[i] = shifted[i].at(j);
            Eigen::VectorXcd y = g(u.grid.t(j), states);
            if (y.size() != dim) throw config_error("delay map returned the wrong dimension");
            out.samples.row(j) = y.transpose().array();
        }
        return ImpulsiveFunction(std::move(out));
    };
    return F;
}

RhsOperator integro_rhs(MemoryKernel h, std::function<double(double)> L, double horizon,
                        int dim, double rho_min) {
    if (!h) throw config_error("memory kernel must be set");
    if (!L) throw config_error("kernel bound L must be set");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw config_error("memory horizon must be positive");
    if (dim < 1) throw config_error("state dimension must be >= 1");
    if (!(rho_min >= 0.0) || !std::isfinite(rho_min))
        throw config_error("rho_min must be finite and >= 0");

    RhsOperator F;
    F.dim = dim;
    F.regime = Regime::into_zero;
    F.lipschitz = weighted_kernel_mass(L, horizon, 0.0);
    F.rho_min = rho_min;
    F.memory_horizon = horizon;
    F.contraction_factor = [L, horizon](double rho) {
        return weighted_kernel_mass(L, horizon, rho) / rho;
    };
    F.apply = [h, horizon, dim](const GridFunction& u) {
        if (u.dim != dim) throw config_error("state dimension mismatch in memory integral");
        const TimeGrid& g = u.grid;
        const double dt = g.dt();
        const int64_t m = std::max<int64_t>(1, std::llround(horizon / dt));
        GridFunction out(g, dim);
        // Rows are independent; the theta sum inside each row stays serial, so
        // the result is bitwise independent of the thread count.
        std::atomic<bool> bad{false};
#pragma omp parallel for schedule(static)
        for (int64_t j = 0; j < g.n; ++j) {
            if (bad.load(std::memory_order_relaxed)) continue;
            Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(dim);
            const double t = g.t(j);
            bool ok = true;
            for (int64_t i = 0; i <= m; ++i) {
                const int64_t src = j - i;
                Eigen::VectorXcd x =
                    (src >= 0) ? u.at(src) : Eigen::VectorXcd::Zero(dim).eval();
                Eigen::VectorXcd y;
                try {
                    y = h(t, -static_cast<double>(i) * dt, x);
                } catch (...) {
                    ok = false;
                    break;
                }
                if (y.size() != dim) {
                    ok = false;
                    break;
                }
                const double wq = (i == 0 || i == m) ? 0.5 : 1.0;
                acc += (wq * dt) * y;
            }
            if (!ok)
                bad.store(true, std::memory_order_relaxed);
            else
                out.samples.row(j) = acc.transpose().array();
        }
        if (bad.load()) throw config_error("memory kernel evaluation failed");
        return ImpulsiveFunction(std::move(out));
    };
    return F;
}

SolveReport history_problem(const RhsOperator& phi, const HistoryFunction& hist,
                            const SolverConfig& cfg) {
    if (!phi.apply) throw config_error("history problem needs a right-hand side with apply set");
    if (phi.regime == Regime::into_zero_from_one)
        throw config_error("history problems need a right-hand side into the zero space");
    const TimeGrid& hg = hist.past.grid;
    if (std::abs(hg.t_max) > hg.dt() / 4.0)
        throw config_error("history grid must end at time zero");
    if (hist.past.dim != phi.dim) throw config_error("history dimension mismatch");
    if (hist.value_at_zero_minus.size() != phi.dim)
        throw config_error("history left limit dimension mismatch");
    if (!hist.value_at_zero_minus.allFinite() || !hist.past.finite())
        throw config_error("history values must be finite");
    if (!(phi.memory_horizon >= 0.0) || !std::isfinite(phi.memory_horizon))
        throw config_error("memory horizon must be finite and >= 0");
    if (phi.memory_horizon > (hg.t_max - hg.t_min) + hg.dt() / 4.0)
        throw config_error("history underrun: memory horizon exceeds the supplied history window");
    const TimeGrid& g = cfg.grid;
    const double dt = g.dt();
    if (!g.contains(0.0)) throw config_error("solve grid must contain time zero");

    GridFunction hist_ext(g, phi.dim);
    for (int64_t j = 0; j < g.n; ++j) {
        const double t = g.t(j);
        if (t < -dt / 4.0) hist_ext.samples.row(j) = hist.past.value(t).transpose().array();
    }

    RhsOperator F;
    F.dim = phi.dim;
    F.lipschitz = phi.lipschitz;
    F.regime = phi.regime;
    F.rho_min = phi.rho_min;
    F.contraction_factor = phi.contraction_factor;
    F.spectral_step = phi.spectral_step;
    auto base = phi.apply;
    Eigen::VectorXcd v0 = hist.value_at_zero_minus;
    F.apply = [base, hist_ext, v0](const GridFunction& wfun) {
        GridFunction total = hist_ext;
        total.samples += wfun.samples;
        ImpulsiveFunction gval = base(total);
        if (!gval.impulses.empty())
            throw config_error("history problems need an impulse-free right-hand side");
        GridFunction masked = cutoff(gval.regular, {CutoffSide::above, 0.0});
        std::vector<Impulse> imps;
        imps.push_back({0.0, v0});
        return ImpulsiveFunction(std::move(masked), std::move(imps));
    };

    SolveReport rep = picard_solve(F, cfg);
    const GridFunction& wsol = rep.solution;

    double leak = 0.0;
    for (int64_t j = 0; j < g.n && g.t(j) < -dt / 4.0; ++j)
        leak = std::max(leak, wsol.samples.row(j).abs().maxCoeff());
    const double scale = std::max(1.0, kernels::max_abs(wsol.samples, kernels::default_exec()));
    if (leak > 1e-12 * scale)
        throw numeric_error("computed trajectory leaks into the past");
    const int64_t j0 = g.index_of(0.0);
    const double v0_scale = std::max(1.0, v0.cwiseAbs().maxCoeff());
    if ((wsol.at(j0) - v0).cwiseAbs().maxCoeff() > 1e-13 * v0_scale)
        throw numeric_error("computed trajectory does not start at the history value");

    GridFunction spliced = wsol;
    for (int64_t j = 0; j < g.n; ++j) {
        const double t = g.t(j);
        if (t < -dt / 4.0) spliced.samples.row(j) = hist.past.value(t).transpose().array();
    }
    rep.solution = std::move(spliced);
    return rep;
}

RhsOperator wrapped_rhs(const Symbol& M, const RhsOperator& F, const Symbol& N, Weight w) {
    if (!F.apply) throw config_error("wrapped operator needs an inner map with apply set");
    if (F.regime == Regime::into_zero_from_one)
        throw config_error("wrapped operators need an inner map into the zero space");
    if (!(M.radius > 0.0) || !(N.radius > 0.0))
        throw config_error("symbol radius must be positive");
    RhsOperator out;
    out.dim = F.dim;
    out.regime = F.regime;
    out.lipschitz = F.lipschitz * M.norm_bound * N.norm_bound;
    // The symbols' own memory (a delay kernel, say) is not representable here;
    // callers wrapping delay symbols must splice history themselves.
    out.memory_horizon = F.memory_horizon;
    out.spectral_step = true;
    out.rho_min = std::max({F.rho_min, 0.5 / M.radius, 0.5 / N.radius});
    if (F.contraction_factor) {
        const double gain = M.norm_bound * N.norm_bound;
        auto inner = F.contraction_factor;
        out.contraction_factor = [gain, inner](double rho) { return gain * inner(rho); };
    }
    Symbol Ms = M, Ns = N;
    auto base = F.apply;
    out.apply = [Ms, base, Ns, w](const GridFunction& u) {
        GridFunction nu = apply_symbol(u, Ns, w, 1e-6, false);
        ImpulsiveFunction gval = base(nu);
        if (!gval.impulses.empty())
            throw config_error("wrapped operators act on regular parts only");
        return ImpulsiveFunction(apply_symbol(gval.regular, Ms, w, 1e-6, false), {});
    };
    return out;
}

double neutral_minimal_rho(const Eigen::MatrixXcd& C, double h1) {
    if (!(h1 > 0.0) || !std::isfinite(h1))
        throw config_error("difference delay h1 must be positive");
    if (C.rows() != C.cols() || C.rows() < 1)
        throw config_error("difference coefficient must be square");
    const double nc = spectral_norm(C);
    if (nc == 0.0) return -std::numeric_limits<double>::infinity();
    return std::log(nc) / h1;
}

SolveReport neutral_linear_solve(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B,
                                 const Eigen::MatrixXcd& C, double h1, double h2,
                                 const GridFunction& f, const SolverConfig& cfg) {
    const auto d = A.rows();
    if (A.cols() != d || B.rows() != d || B.cols() != d || C.rows() != d || C.cols() != d || d < 1)
        throw config_error("coefficient matrices must be square and of equal size");
    if (!(h1 > 0.0) || !std::isfinite(h1)) throw config_error("difference delay h1 must be positive");
    if (!(h2 > 0.0) || !std::isfinite(h2)) throw config_error("state delay h2 must be positive");
    if (f.dim != d) throw config_error("source dimension mismatch");
    if (!f.grid.same(cfg.grid)) throw config_error("source must live on the solve grid");
    if (!f.finite()) throw config_error("source must be finite");

    const double min_rho = neutral_minimal_rho(C, h1);
    double rho = cfg.rho;
    if (rho == 0.0) {
        const double base = std::max(1.0, spectral_norm(A) + spectral_norm(B));
        rho = std::max(2.0 * base, 1.25 * std::max(min_rho, 0.0));
    }
    if (!(rho > min_rho)) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "weight is inadmissible for the difference operator: need rho > %.6g",
                      min_rho);
        throw non_contraction_error(buf);
    }

    // Gate the resolvent strictly between the admissibility threshold and rho.
    const double res_gate = std::max(0.95 * rho, 0.5 * (std::max(min_rho, 0.0) + rho));
    Symbol aff = make_matrix_affine_symbol(A, B, h2);
    Symbol res = make_neutral_resolvent_symbol(C, h1, res_gate);
    Weight w(rho);

    RhsOperator F;
    F.dim = static_cast<int>(d);
    F.regime = Regime::into_zero;
    F.lipschitz = aff.norm_bound * res.norm_bound;
    F.rho_min = res_gate;
    F.spectral_step = true;
    GridFunction src = f;
    // As in wrapped_rhs, the right-edge decay guard is off inside the loop:
    // Picard transients grow before the contraction tames them, and both
    // symbols here are causal.
    F.apply = [aff, res, w, src](const GridFunction& u) {
        GridFunction gv = apply_symbol(u, aff, w, 1e-6, false);
        gv.samples += src.samples;
        return ImpulsiveFunction(apply_symbol(gv, res, w, 1e-6, false), {});
    };

    SolverConfig c2 = cfg;
    c2.rho = rho;
    return picard_solve(F, c2);
}

RhsOperator neutral_general_rhs(PairMap phi, double lip_sum, const Bijection& alpha,
                                const Bijection& beta, double eps0, const TimeGrid& grid,
                                int dim) {
    if (!phi) throw config_error("neutral right-hand side must be set");
    if (!alpha.forward || !beta.forward)
        throw config_error("time changes need forward maps");
    if (!(eps0 > 0.0) || !std::isfinite(eps0))
        throw config_error("derivative lag eps0 must be positive");
    if (!(lip_sum >= 0.0) || !std::isfinite(lip_sum))
        throw config_error("lipschitz constant must be finite and >= 0");
    if (!(alpha.sup_derivative > 0.0) || !(beta.sup_derivative > 0.0))
        throw config_error("sup_derivative bounds must be positive");
    if (dim < 1) throw config_error("state dimension must be >= 1");

    const double slack = grid.dt() * 1e-6;
    double pa = alpha.forward(grid.t(0));
    double pb = beta.forward(grid.t(0));
    if (!(pa >= grid.t(0) - slack))
        throw config_error("time change alpha must satisfy alpha(s) >= s");
    if (!(pb >= grid.t(0) + eps0 - slack))
        throw config_error("time change beta must satisfy beta(s) >= s + eps0");
    for (int64_t j = 1; j < grid.n; ++j) {
        const double s = grid.t(j);
        const double a = alpha.forward(s);
        const double b = beta.forward(s);
        if (!(a > pa) || !(b > pb))
            throw config_error("time changes must be strictly increasing");
        if (!(a >= s - slack))
            throw config_error("time change alpha must satisfy alpha(s) >= s");
        if (!(b >= s + eps0 - slack))
            throw config_error("time change beta must satisfy beta(s) >= s + eps0");
        pa = a;
        pb = b;
    }

    std::vector<double> ainv(grid.n), binv(grid.n);
    double lookback = 0.0;
    for (int64_t j = 0; j < grid.n; ++j) {
        const double t = grid.t(j);
        ainv[j] = alpha.inverse ? alpha.inverse(t) : invert_increasing(alpha.forward, t);
        binv[j] = beta.inverse ? beta.inverse(t) : invert_increasing(beta.forward, t);
        const double tol = 1e-8 * std::max(1.0, std::abs(t));
        if (std::abs(alpha.forward(ainv[j]) - t) > tol ||
            std::abs(beta.forward(binv[j]) - t) > tol)
            throw config_error("supplied inverse does not match the forward map");
        lookback = std::max({lookback, t - ainv[j], t - binv[j]});
    }

    const double da = alpha.sup_derivative;
    const double db = beta.sup_derivative;
    auto factor = [lip_sum, da, db, eps0](double rho) {
        return lip_sum * (std::sqrt(da) / rho + std::sqrt(db) * std::exp(-rho * eps0));
    };
    double rho_min = 0.01;
    if (lip_sum > 0.0) {
        double hi = 1.0;
        int guard = 0;
        while (factor(hi) >= 1.0) {
            hi *= 2.0;
            if (++guard > 60) throw config_error("no admissible weight for the neutral operator");
        }
        double lo = 1e-9;
        for (int it = 0; it < 200 && hi - lo > 1e-10 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (factor(mid) >= 1.0 ? lo : hi) = mid;
        }
        rho_min = hi;
    }

    RhsOperator F;
    F.dim = dim;
    F.regime = Regime::into_zero_from_one;
    F.lipschitz = lip_sum;
    F.rho_min = rho_min;
    F.memory_horizon = lookback;
    F.contraction_factor = factor;
    TimeGrid g = grid;
    F.apply_pair = [phi, ainv, binv, g, dim](const GridFunction& U, const GridFunction& V) {
        if (!U.grid.same(g) || !V.grid.same(g))
            throw config_error("neutral operator is bound to a different grid");
        if (U.dim != dim || V.dim != dim)
            throw config_error("state dimension mismatch in neutral operator");
        GridFunction X(g, dim), Y(g, dim);
        for (int64_t j = 0; j < g.n; ++j) {
            X.samples.row(j) = U.value(ainv[j]).transpose().array();
            Y.samples.row(j) = V.value(binv[j]).transpose().array();
        }
        GridFunction out = phi(X, Y);
        if (!out.grid.same(g) || out.dim != dim)
            throw config_error("neutral right-hand side returned a mismatched function");
        return ImpulsiveFunction(std::move(out));
    };
    F.apply = [ap = F.apply_pair](const GridFunction& U) { return ap(U, derivative(U)); };
    return F;
}

LocalReport local_solve(PointwiseMap g, double eta, double lip,
                        const Eigen::VectorXcd& u0, double horizon,
                        const SolverConfig& cfg) {
    if (!g) throw config_error("local problem needs a map");
    if (!(eta > 0.0) || !std::isfinite(eta))
        throw config_error("projection radius eta must be positive");
    if (!(lip >= 0.0) || !std::isfinite(lip))
        throw config_error("lipschitz constant must be finite and >= 0");
    if (u0.size() < 1 || !u0.allFinite()) throw config_error("initial value must be finite");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw config_error("local horizon must be positive");
    const TimeGrid& grd = cfg.grid;
    const double dt = grd.dt();
    if (!grd.contains(0.0)) throw config_error("local grid must contain time zero");
    if (grd.t_max < horizon - dt / 4.0)
        throw config_error("local grid must cover the horizon");

    const int dim = static_cast<int>(u0.size());
    BallProjection P{u0, eta};
    auto masked = [g, P, horizon, dt](double t, const Eigen::VectorXcd& x) {
        if (t < -dt / 4.0 || t > horizon + dt / 4.0)
            return Eigen::VectorXcd::Zero(x.size()).eval();
        return g(t, P(x));
    };
    RhsOperator F = ivp_problem(nemitzki_rhs(masked, lip, dim), u0);
    SolveReport rep = picard_solve(F, cfg);

    // First exit of the excess |v - u0| from the closed ball, located by a
    // linear crossing between nodes; v(0) = u0 exactly, so node j0 never exits.
    const GridFunction& v = rep.solution;
    const int64_t j0 = grd.index_of(0.0);
    double t_star = horizon;
    double prev_e = 0.0;
    double prev_t = 0.0;
    for (int64_t j = j0; j < grd.n && grd.t(j) <= horizon + dt / 4.0; ++j) {
        const double e = (v.at(j) - u0).norm();
        const double t = grd.t(j);
        if (e > eta) {
            const double de = e - prev_e;
            t_star = (de > 0.0) ? prev_t + (eta - prev_e) / de * (t - prev_t) : t;
            if (j <= j0 + 1)
                throw config_error("projection radius is exhausted within the first time step");
            break;
        }
        prev_e = e;
        prev_t = t;
    }

    LocalReport out;
    out.report = std::move(rep);
    out.t_star = t_star;
    out.time_bound = lip > 0.0 ? 2.0 * out.report.rho_used / (lip * lip)
                               : std::numeric_limits<double>::infinity();
    return out;
}

}
