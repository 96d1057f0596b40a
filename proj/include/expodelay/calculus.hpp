#ifndef EXPODELAY_CALCULUS_HPP
#define EXPODELAY_CALCULUS_HPP

#include "expodelay/grid_function.hpp"

namespace expodelay {

// t -> integral over (-inf, t]; requires rho > 0 (causal branch).
GridFunction causal_integrate(const GridFunction& f, Weight w);

// t -> -integral over [t, +inf); requires rho < 0.
GridFunction anticausal_integrate(const GridFunction& f, Weight w);

// Second-order finite differences; the plain d/dt (weight-free).
GridFunction derivative(const GridFunction& f);

// (tau_h f)(t) = f(t+h); h < 0 delays. Linear interpolation off-grid.
GridFunction translate(const GridFunction& f, double h);

struct CutoffSide {
    enum Side { below, above };
    Side side;
    double threshold;
};

// side=below keeps t <= a, side=above keeps t >= a; the node at a survives on both.
GridFunction cutoff(const GridFunction& f, CutoffSide c);

// s -> e^{2 rho s} * integral_s^{t_max} e^{-2 rho t} g(t) dt; the Hilbert adjoint
// of causal_integrate in H_{rho,0}. Amnesic, not causal.
GridFunction adjoint_causal_integrate(const GridFunction& g, Weight w);

// causal_integrate(regular) + exact Heaviside steps. The quadrature cell that
// ends at an impulse node uses left extrapolation: the sample at the node is a
// right-limit by the cutoff convention and must not leak into the past cell.
GridFunction integrate_impulsive(const ImpulsiveFunction& F, Weight w);

}

#endif
