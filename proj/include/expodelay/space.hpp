#ifndef EXPODELAY_SPACE_HPP
#define EXPODELAY_SPACE_HPP

#include "expodelay/grid_function.hpp"

namespace expodelay {

// Trapezoidal quadrature of integral conj(f).g e^{-2 rho t} dt.
// Conjugate-linear in the first argument.
cd inner_product(const GridFunction& f, const GridFunction& g, Weight w);

// k = 0: the rho,0 norm. k = 1: rho,0 norm of derivative(f) + rho*f.
double norm(const GridFunction& f, Weight w, int k = 0);

// Linear interpolation onto target; zero outside f's window.
GridFunction resample(const GridFunction& f, const TimeGrid& target);

double sup_abs(const GridFunction& f);

}

#endif
