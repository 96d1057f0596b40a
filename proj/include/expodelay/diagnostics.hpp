#ifndef EXPODELAY_DIAGNOSTICS_HPP
#define EXPODELAY_DIAGNOSTICS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "expodelay/grid_function.hpp"
#include "expodelay/solver.hpp"

namespace expodelay {

// Which half-line the two functions of a probe pair agree on, relative to
// the pair's threshold a. Causality checks need agreement below a, amnesia
// checks agreement above a.
enum class AgreeSide { below, above };

struct ProbePair {
    GridFunction x;
    GridFunction y;
    double a = 0.0;
};

// Finite stand-in for the quantifiers "for all x, y, a": 8 thresholds
// between grid nodes spanning the window, 16 randomized pairs each. The
// agreement region is exact by construction (the difference is a hard
// cutoff), never approximate.
struct ProbeSet {
    TimeGrid grid;
    int dim = 1;
    Weight weight;
    AgreeSide side = AgreeSide::below;
    std::uint64_t seed = 0;
    std::vector<double> thresholds;
    std::vector<ProbePair> probes;
};

ProbeSet make_probe_set(const TimeGrid& grid, int dim, Weight w, AgreeSide side,
                        std::uint64_t seed);

struct Witness {
    GridFunction x;
    GridFunction y;
    double a = 0.0;
    double violation = 0.0;
};

// A verdict is a certificate on the probe set, never a proof.
struct Verdict {
    bool passed = false;
    std::optional<Witness> witness;
    double tolerance = 0.0;
    std::string label = "certificate on probes";
};

using GridMap = std::function<GridFunction(const GridFunction&)>;

// Outputs may differ only where the inputs do: below each threshold the
// images of an agree-below pair must coincide within tol.
Verdict check_causal(const GridMap& W, const ProbeSet& probes, double tol);

// Mirror image: agree-above pairs must have images agreeing above a.
Verdict check_amnesic(const GridMap& W, const ProbeSet& probes, double tol);

enum class MemoryClass { no_delay, has_delay };

// Runs the amnesia check on the adjoint integral of F. Impulses pass through
// the adjoint integrator by their closed form rather than differentiation.
// The classification is evaluated at w and at 2w; a disagreement between the
// two weights is reported through the optional flag, with the verdict at w
// returned either way.
MemoryClass classify_memory(const RhsOperator& F, Weight w, const ProbeSet& probes,
                            bool* rho_disagreement = nullptr);

// F commutes with time translation by the grid-aligned shift h on all probes,
// where each probe pair is read as (state, source).
Verdict check_autonomous(const std::function<GridFunction(const GridFunction&, const GridFunction&)>& F,
                         double h, const ProbeSet& probes, double tol);

// Solves the same problem at two admissible weights and compares in sup norm.
// Solver errors (including non-contraction at an inadmissible weight) pass
// through; no verdict is produced in that case.
Verdict check_rho_independence(const RhsOperator& F, const SolverConfig& cfg, Weight rho1,
                               Weight rho2, double tol);

// Certifies the two trace bounds: the weighted sup bound with constant
// 1/sqrt(2 rho) and the weighted Hoelder-1/2 quotient bound with constant 1,
// each against the discrete rho,1 norm with slack tol + O(dt).
Verdict trace_check(const GridFunction& u, Weight w, double tol);

}

#endif
