#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "expodelay/calculus.hpp"
#include "expodelay/diagnostics.hpp"
#include "expodelay/errors.hpp"
#include "expodelay/space.hpp"
#include "test_util.hpp"

using namespace expodelay;
using testutil::from_fn;
using testutil::gaussian;

namespace {

GridMap integrator(Weight w) {
    return [w](const GridFunction& f) { return causal_integrate(f, w); };
}

GridMap adjoint_integrator(Weight w) {
    return [w](const GridFunction& f) { return adjoint_causal_integrate(f, w); };
}

// Time reflection of the causal integrator on a symmetric window.
GridMap reflected_integrator() {
    return [](const GridFunction& f) {
        GridFunction rf = f;
        rf.samples = f.samples.colwise().reverse().eval();
        GridFunction g = causal_integrate(rf, Weight(1.0));
        g.samples = g.samples.colwise().reverse().eval();
        return g;
    };
}

}  // namespace

TEST_CASE("probe sets have exact agreement regions and spanning thresholds") {
    TimeGrid grid(-2.0, 4.0, 3001);
    ProbeSet below = make_probe_set(grid, 2, Weight(2.0), AgreeSide::below, 7);
    CHECK(below.thresholds.size() == 8);
    CHECK(below.probes.size() == 8 * 16);
    for (double a : below.thresholds) {
        CHECK(a > grid.t_min);
        CHECK(a < grid.t_max);
        for (int64_t j = 0; j < grid.n; ++j) CHECK(std::abs(grid.t(j) - a) > grid.dt() / 8);
    }
    for (const ProbePair& p : below.probes) {
        for (int64_t j = 0; j < grid.n; ++j) {
            if (grid.t(j) < p.a) {
                CHECK((p.x.samples.row(j) == p.y.samples.row(j)).all());
            }
        }
    }
    ProbeSet above = make_probe_set(grid, 1, Weight(2.0), AgreeSide::above, 7);
    bool some_difference = false;
    for (const ProbePair& p : above.probes) {
        for (int64_t j = 0; j < grid.n; ++j) {
            if (grid.t(j) > p.a) {
                CHECK((p.x.samples.row(j) == p.y.samples.row(j)).all());
            } else if (!(p.x.samples.row(j) == p.y.samples.row(j)).all()) {
                some_difference = true;
            }
        }
    }
    CHECK(some_difference);
}

TEST_CASE("causality certificates for the integrator family") {
    TimeGrid grid(-2.0, 4.0, 3001);
    ProbeSet probes = make_probe_set(grid, 1, Weight(2.0), AgreeSide::below, 11);

    Verdict causal = check_causal(integrator(Weight(2.0)), probes, 1e-10);
    CHECK(causal.passed);
    CHECK(!causal.witness.has_value());
    CHECK(causal.label == "certificate on probes");

    Verdict ident = check_causal([](const GridFunction& f) { return f; }, probes, 1e-12);
    CHECK(ident.passed);

    Verdict adj = check_causal(adjoint_integrator(Weight(2.0)), probes, 1e-6);
    CHECK(!adj.passed);
    REQUIRE(adj.witness.has_value());
    CHECK(adj.witness->violation > 1e-6);
    CHECK(adj.witness->a > grid.t_min);
}

TEST_CASE("amnesia certificates mirror the causal ones") {
    TimeGrid grid(-2.0, 4.0, 3001);
    ProbeSet probes = make_probe_set(grid, 1, Weight(2.0), AgreeSide::above, 13);

    CHECK(check_amnesic(adjoint_integrator(Weight(2.0)), probes, 1e-10).passed);

    Verdict mem = check_amnesic(integrator(Weight(2.0)), probes, 1e-6);
    CHECK(!mem.passed);
    REQUIRE(mem.witness.has_value());

    GridMap nemitzki = [](const GridFunction& u) {
        GridFunction g = u;
        g.samples = u.samples.sin();
        return g;
    };
    CHECK(check_amnesic(nemitzki, probes, 1e-12).passed);
}

TEST_CASE("agreement side of the probes is enforced") {
    TimeGrid grid(-1.0, 1.0, 501);
    ProbeSet below = make_probe_set(grid, 1, Weight(1.0), AgreeSide::below, 3);
    ProbeSet above = make_probe_set(grid, 1, Weight(1.0), AgreeSide::above, 3);
    GridMap id = [](const GridFunction& f) { return f; };
    CHECK_THROWS_AS(check_causal(id, above, 1e-10), config_error);
    CHECK_THROWS_AS(check_amnesic(id, below, 1e-10), config_error);
}

TEST_CASE("time reflection swaps causal and amnesic") {
    TimeGrid grid(-4.0, 4.0, 4001);
    ProbeSet below = make_probe_set(grid, 1, Weight(1.0), AgreeSide::below, 17);
    ProbeSet above = make_probe_set(grid, 1, Weight(1.0), AgreeSide::above, 17);

    GridMap fwd = integrator(Weight(1.0));
    GridMap bwd = reflected_integrator();

    CHECK(check_causal(fwd, below, 1e-10).passed);
    CHECK(!check_amnesic(fwd, above, 1e-6).passed);
    CHECK(check_amnesic(bwd, above, 1e-10).passed);
    CHECK(!check_causal(bwd, below, 1e-6).passed);
}

TEST_CASE("memory classification separates pointwise from delayed operators") {
    TimeGrid grid(-2.0, 4.0, 3001);
    const Weight w(2.0);
    ProbeSet probes = make_probe_set(grid, 1, w, AgreeSide::above, 19);
    GridFunction g = gaussian(grid, 1.0, 0.4);

    RhsOperator nemitzki;
    nemitzki.apply = [g](const GridFunction& u) {
        ImpulsiveFunction out;
        out.regular = u;
        out.regular.samples = u.samples.sin() + g.samples;
        return out;
    };
    nemitzki.lipschitz = 1.0;
    nemitzki.rho_min = 1.0;
    bool disagree = true;
    CHECK(classify_memory(nemitzki, w, probes, &disagree) == MemoryClass::no_delay);
    CHECK(!disagree);

    RhsOperator delayed;
    delayed.apply = [g](const GridFunction& u) {
        ImpulsiveFunction out;
        out.regular = translate(u, -1.0);
        out.regular.samples += g.samples;
        return out;
    };
    delayed.lipschitz = 1.0;
    delayed.rho_min = 1.0;
    CHECK(classify_memory(delayed, w, probes, &disagree) == MemoryClass::has_delay);
    CHECK(!disagree);

    RhsOperator zero;
    zero.apply = [](const GridFunction& u) {
        return ImpulsiveFunction{GridFunction::zero(u.grid, u.dim), {}};
    };
    CHECK(classify_memory(zero, w, probes) == MemoryClass::no_delay);
}

TEST_CASE("a handcrafted history pair witnesses the delay") {
    TimeGrid grid(-2.0, 4.0, 3001);
    const Weight w(2.0);
    ProbeSet probes = make_probe_set(grid, 1, w, AgreeSide::above, 23);
    probes.probes.clear();
    ProbePair hand;
    hand.a = 0.0;  // between nodes is not needed; the pair agrees strictly above
    hand.x = gaussian(grid, -0.5, 0.12);
    hand.x = cutoff(hand.x, {CutoffSide::below, 0.0});
    hand.y = GridFunction::zero(grid, 1);
    probes.probes.push_back(hand);

    RhsOperator delayed;
    delayed.apply = [](const GridFunction& u) { return ImpulsiveFunction{translate(u, -1.0), {}}; };
    delayed.lipschitz = 1.0;
    delayed.rho_min = 1.0;
    CHECK(classify_memory(delayed, w, probes) == MemoryClass::has_delay);
}

TEST_CASE("classification ignores impulsive and constant sources") {
    TimeGrid grid(-2.0, 4.0, 3001);
    const Weight w(2.0);
    ProbeSet probes = make_probe_set(grid, 1, w, AgreeSide::above, 29);
    GridFunction g = gaussian(grid, 2.0, 0.3);

    auto with_sources = [g](bool delayed) {
        RhsOperator F;
        F.apply = [g, delayed](const GridFunction& u) {
            ImpulsiveFunction out;
            out.regular = delayed ? translate(u, -0.5) : u;
            out.regular.samples += g.samples;
            out.impulses.push_back({0.0, Eigen::VectorXcd::Ones(1)});
            return out;
        };
        F.lipschitz = 1.0;
        F.rho_min = 1.0;
        return F;
    };
    CHECK(classify_memory(with_sources(false), w, probes) == MemoryClass::no_delay);
    CHECK(classify_memory(with_sources(true), w, probes) == MemoryClass::has_delay);
}

TEST_CASE("autonomy certificates") {
    // Probe supports are confined to [-2,2] so that neither the probe shift
    // (0.5) nor the delayed example map (1.0) pushes anything off the window.
    TimeGrid grid(-8.0, 8.0, 4001);
    ProbeSet probes = make_probe_set(grid, 1, Weight(2.0), AgreeSide::below, 31);
    std::mt19937_64 rng(31);
    for (ProbePair& p : probes.probes) {
        p.x = testutil::random_smooth(grid, rng, -2.0, 2.0, 1, true);
        p.y = testutil::random_smooth(grid, rng, -2.0, 2.0, 1, true);
    }
    const double h = 0.5;

    auto pointwise = [](const GridFunction& u, const GridFunction& f) {
        GridFunction g = u;
        g.samples = u.samples.sin() + f.samples;
        return g;
    };
    CHECK(check_autonomous(pointwise, h, probes, 1e-9).passed);

    auto clock_dependent = [](const GridFunction& u, const GridFunction& f) {
        GridFunction g = u;
        for (int64_t j = 0; j < u.grid.n; ++j) g.samples.row(j) *= u.grid.t(j);
        g.samples += f.samples;
        return g;
    };
    Verdict v = check_autonomous(clock_dependent, h, probes, 1e-6);
    CHECK(!v.passed);
    REQUIRE(v.witness.has_value());
    CHECK(v.witness->violation > 1e-6);

    auto shifted = [](const GridFunction& u, const GridFunction& f) {
        GridFunction g = translate(u, -1.0);
        g.samples += f.samples;
        return g;
    };
    CHECK(check_autonomous(shifted, h, probes, 1e-9).passed);

    CHECK_THROWS_AS(check_autonomous(pointwise, h + grid.dt() / 3, probes, 1e-9), config_error);
}

TEST_CASE("solutions agree across admissible weights") {
    TimeGrid grid = TimeGrid::from_step(-1.0, 6.0, 1e-3);
    RhsOperator F;
    F.apply = [](const GridFunction& u) {
        ImpulsiveFunction g;
        g.regular = u;
        g.regular.samples = -u.samples;
        g.impulses.push_back({0.0, Eigen::VectorXcd::Ones(1)});
        return g;
    };
    F.lipschitz = 1.0;
    F.regime = Regime::into_zero;
    F.rho_min = 1.0;
    SolverConfig cfg{grid};
    Verdict v = check_rho_independence(F, cfg, Weight(2.0), Weight(4.0), 1e-8);
    CHECK(v.passed);

    GridFunction hist_feed = testutil::indicator(grid, 0.0, 1.0 - 1e-3);
    RhsOperator dde;
    dde.apply = [hist_feed](const GridFunction& u) {
        GridFunction lag = translate(u, -1.0);
        lag.samples = -(lag.samples + hist_feed.samples);
        ImpulsiveFunction g;
        g.regular = cutoff(lag, {CutoffSide::above, 0.0});
        g.impulses.push_back({0.0, Eigen::VectorXcd::Ones(1)});
        return g;
    };
    dde.lipschitz = 1.0;
    dde.regime = Regime::into_zero;
    dde.rho_min = 1.0;
    CHECK(check_rho_independence(dde, cfg, Weight(2.0), Weight(3.0), 1e-8).passed);
}

TEST_CASE("an inadmissible weight surfaces as the solver's non-contraction error") {
    TimeGrid grid(-1.0, 4.0, 2501);
    RhsOperator stiff;
    stiff.apply = [](const GridFunction& u) {
        ImpulsiveFunction g;
        g.regular = u;
        g.regular.samples = -5.0 * u.samples;
        g.regular.samples.row(u.grid.n / 2).setConstant(1.0);
        return g;
    };
    stiff.lipschitz = 5.0;
    stiff.regime = Regime::into_zero;
    stiff.rho_min = 0.1;
    SolverConfig cfg{grid};
    CHECK_THROWS_AS(check_rho_independence(stiff, cfg, Weight(2.0), Weight(10.0), 1e-8),
                    non_contraction_error);
}

TEST_CASE("every solve passes the causality certificate") {
    TimeGrid grid(-1.0, 4.0, 2501);
    const Weight w(2.0);
    ProbeSet probes = make_probe_set(grid, 1, w, AgreeSide::below, 37);

    GridMap solution_operator = [&](const GridFunction& f) {
        RhsOperator F;
        F.apply = [&f](const GridFunction& u) {
            ImpulsiveFunction g;
            g.regular = u;
            g.regular.samples = -u.samples + f.samples;
            return g;
        };
        F.lipschitz = 1.0;
        F.regime = Regime::into_zero;
        F.rho_min = 1.0;
        SolverConfig cfg{grid};
        cfg.rho = w.rho;
        cfg.tol = 1e-12;
        return picard_solve(F, cfg).solution;
    };
    CHECK(check_causal(solution_operator, probes, 1e-10).passed);
}

TEST_CASE("trace bounds hold on the standard examples") {
    TimeGrid grid = TimeGrid::from_step(-2.0, 8.0, 2e-3);
    GridFunction u = from_fn(grid, [](double t) {
        return t < 0.0 ? cd(0.0) : cd(1.0 - std::exp(-t));
    });
    CHECK(trace_check(u, Weight(1.0), 1e-6).passed);

    GridFunction zero = GridFunction::zero(grid, 1);
    CHECK(trace_check(zero, Weight(1.0), 1e-6).passed);

    std::mt19937_64 rng(testutil::seed());
    for (double rho : {1.0, 2.0, 4.0}) {
        for (int k = 0; k < 50; ++k) {
            GridFunction f = testutil::random_smooth(grid, rng, -2.0, 8.0, 2, true);
            Verdict v = trace_check(f, Weight(rho), 1e-6);
            CHECK(v.passed);
        }
    }
}
