#ifndef EXPODELAY_FOURIER_LAPLACE_HPP
#define EXPODELAY_FOURIER_LAPLACE_HPP

#include <cstdint>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "expodelay/grid_function.hpp"

namespace expodelay {

// Weighted spectrum of a grid function: coefficients of F(e^{-rho t} f) on the
// padded DFT grid xi_k = 2 pi k / (N dt), k = -N/2 .. N/2-1, in increasing k.
struct Spectrum {
    Eigen::ArrayXd frequencies;     // N entries
    Eigen::ArrayXXcd coefficients;  // N rows, d columns
    double origin = 0.0;            // t_min of the source grid
    double rho = 0.0;
    int64_t source_n = 0;           // sample count before zero-padding
    double dt = 0.0;
};

// Bounded analytic function on the ball B(r, r) in the right half-plane,
// evaluated at the sampled points z_k = 1/(i xi_k + rho).
struct Symbol {
    std::string label;
    int64_t dim = 1;           // 1 acts componentwise; otherwise must match f.dim
    double radius = 0.0;       // ball parameter r; usable only for rho > 1/(2r)
    double norm_bound = 0.0;   // upper bound for the spectral norm on the ball
    std::function<Eigen::MatrixXcd(cd)> evaluate;
    // Circular-wrap magnitude of the symbol's kernel past `pad_len` of zero
    // padding, relative to the weighted input scale. Empty means e^{-rho pad}.
    std::function<double(double rho, double pad_len)> wrap_estimate;
};

// Forward transform: weight by e^{-rho t}, zero-pad to the next power of two
// >= 2n, DFT with continuum scaling dt/sqrt(2 pi) and phase referenced to t_min.
Spectrum fourier_laplace(const GridFunction& f, Weight w);

// Exact algebraic inverse of the forward transform.
GridFunction fourier_laplace(const Spectrum& sp);

// Functional calculus: multiply coefficient k by s.evaluate(1/(i xi_k + rho)).
// tail_tol bounds both the admitted circular wrap and the undecayed weighted
// mass at the right edge of the window. edge_guard = false skips the
// right-edge check only: solver loops feed transient iterates to causal
// symbols, whose in-window output never depends on the truncated future, and
// the transients would trip a guard meant for ill-weighted user data. The
// circular-wrap check always applies.
GridFunction apply_symbol(const GridFunction& f, const Symbol& s, Weight w,
                          double tail_tol = 1e-6, bool edge_guard = true);

Symbol make_identity_symbol(int64_t dim = 1);
Symbol make_integration_symbol(double rho_min);        // M(z) = z
Symbol make_delay_symbol(double h);                    // M(z) = e^{-h/z}, h > 0
Symbol make_fractional_symbol(double alpha, double rho_min = 0.5);  // M(z) = z^alpha
Symbol make_convolution_symbol(const GridFunction& kernel);         // sampled k, inf supp 0
Symbol make_matrix_affine_symbol(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B,
                                 double h);             // M(z) = A + B e^{-h/z}
Symbol make_neutral_resolvent_symbol(const Eigen::MatrixXcd& C, double h,
                                     double rho_min);   // M(z) = (I - C e^{-h/z})^{-1}

}

#endif
