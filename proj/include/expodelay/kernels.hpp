#ifndef EXPODELAY_KERNELS_HPP
#define EXPODELAY_KERNELS_HPP

#include <complex>

#include <Eigen/Dense>

namespace expodelay::kernels {

enum class Exec { serial, parallel };

// parallel when built with OpenMP and EXPODELAY_SERIAL is unset.
Exec default_exec();

// All kernels use a fixed block decomposition (BLOCK rows) with a serial
// combine in block order, so serial and parallel results are bitwise equal
// and independent of the thread count.
inline constexpr int64_t BLOCK = 2048;

// sum_j w_j e^{-2 rho t_j} conj(f_j) . g_j with trapezoid weights w_j.
std::complex<double> weighted_dot(const Eigen::ArrayXXcd& f, const Eigen::ArrayXXcd& g,
                                  double t_min, double dt, double rho, Exec ex);

// Column-wise cumulative trapezoid from the first row.
void cumtrapz(const Eigen::ArrayXXcd& f, double dt, Eigen::ArrayXXcd& out, Exec ex);

// out_j = e^{a t_j} f_j.
void scale_exp(const Eigen::ArrayXXcd& f, double t_min, double dt, double a,
               Eigen::ArrayXXcd& out, Exec ex);

double max_abs(const Eigen::ArrayXXcd& f, Exec ex);

}

#endif
