#include "expodelay/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace expodelay::kernels {

Exec default_exec() {
#ifdef _OPENMP
    if (std::getenv("EXPODELAY_SERIAL") != nullptr) return Exec::serial;
    return Exec::parallel;
#else
    return Exec::serial;
#endif
}

namespace {

int64_t block_count(int64_t n) { return (n + BLOCK - 1) / BLOCK; }

bool run_parallel(Exec ex) {
#ifdef _OPENMP
    return ex == Exec::parallel;
#else
    (void)ex;
    return false;
#endif
}

}  // namespace

std::complex<double> weighted_dot(const Eigen::ArrayXXcd& f, const Eigen::ArrayXXcd& g,
                                  double t_min, double dt, double rho, Exec ex) {
    const int64_t n = f.rows();
    const int64_t nb = block_count(n);
    std::vector<std::complex<double>> partial(nb);

    // Full-weight row sums; the trapezoid edge halving is applied afterwards.
    auto block_sum = [&](int64_t b) {
        const int64_t lo = b * BLOCK;
        const int64_t hi = std::min(lo + BLOCK, n);
        double re = 0.0, im = 0.0;
        for (int64_t j = lo; j < hi; ++j) {
            const double w = std::exp(-2.0 * rho * (t_min + static_cast<double>(j) * dt));
            std::complex<double> row = (f.row(j).conjugate() * g.row(j)).sum();
            re += w * row.real();
            im += w * row.imag();
        }
        partial[b] = {re, im};
    };

    if (run_parallel(ex)) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
        for (int64_t b = 0; b < nb; ++b) block_sum(b);
#endif
    } else {
        for (int64_t b = 0; b < nb; ++b) block_sum(b);
    }

    std::complex<double> total = 0.0;
    for (int64_t b = 0; b < nb; ++b) total += partial[b];

    auto edge = [&](int64_t j) {
        const double w = std::exp(-2.0 * rho * (t_min + static_cast<double>(j) * dt));
        return w * (f.row(j).conjugate() * g.row(j)).sum();
    };
    total -= 0.5 * (edge(0) + edge(n - 1));
    return total * dt;
}

void cumtrapz(const Eigen::ArrayXXcd& f, double dt, Eigen::ArrayXXcd& out, Exec ex) {
    const int64_t n = f.rows();
    const int64_t d = f.cols();
    out.resize(n, d);
    const int64_t nb = block_count(n);

    // Pass 1: prefix within each block, s_j = sum of half-cell increments up to j.
    auto block_prefix = [&](int64_t b) {
        const int64_t lo = b * BLOCK;
        const int64_t hi = std::min(lo + BLOCK, n);
        for (int64_t c = 0; c < d; ++c) {
            std::complex<double> acc = 0.0;
            for (int64_t j = lo; j < hi; ++j) {
                if (j > lo) acc += 0.5 * dt * (f(j - 1, c) + f(j, c));
                out(j, c) = acc;
            }
        }
    };

    if (run_parallel(ex)) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
        for (int64_t b = 0; b < nb; ++b) block_prefix(b);
#endif
    } else {
        for (int64_t b = 0; b < nb; ++b) block_prefix(b);
    }

    if (nb == 1) return;

    // Pass 2: carry block totals (serial, fixed order). The first cell of block b
    // bridges rows lo-1 and lo and is not in any block prefix; add it to the carry.
    std::vector<Eigen::ArrayXcd> carry(nb, Eigen::ArrayXcd::Zero(d));
    for (int64_t b = 1; b < nb; ++b) {
        const int64_t lo = b * BLOCK;
        const int64_t prev_hi = lo - 1;
        for (int64_t c = 0; c < d; ++c)
            carry[b](c) = carry[b - 1](c) + out(prev_hi, c) + 0.5 * dt * (f(prev_hi, c) + f(lo, c));
    }

    // Pass 3: add carries. Row lo of block b gets exactly carry[b].
    auto add_carry = [&](int64_t b) {
        const int64_t lo = b * BLOCK;
        const int64_t hi = std::min(lo + BLOCK, n);
        for (int64_t c = 0; c < d; ++c) {
            const std::complex<double> off = carry[b](c) - out(lo, c);
            for (int64_t j = lo; j < hi; ++j) out(j, c) += off;
        }
    };

    if (run_parallel(ex)) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
        for (int64_t b = 1; b < nb; ++b) add_carry(b);
#endif
    } else {
        for (int64_t b = 1; b < nb; ++b) add_carry(b);
    }
}

void scale_exp(const Eigen::ArrayXXcd& f, double t_min, double dt, double a,
               Eigen::ArrayXXcd& out, Exec ex) {
    const int64_t n = f.rows();
    out.resize(n, f.cols());
    const int64_t nb = block_count(n);

    auto block_scale = [&](int64_t b) {
        const int64_t lo = b * BLOCK;
        const int64_t hi = std::min(lo + BLOCK, n);
        for (int64_t j = lo; j < hi; ++j)
            out.row(j) = f.row(j) * std::exp(a * (t_min + static_cast<double>(j) * dt));
    };

    if (run_parallel(ex)) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
        for (int64_t b = 0; b < nb; ++b) block_scale(b);
#endif
    } else {
        for (int64_t b = 0; b < nb; ++b) block_scale(b);
    }
}

double max_abs(const Eigen::ArrayXXcd& f, Exec ex) {
    const int64_t n = f.rows();
    const int64_t nb = block_count(n);
    std::vector<double> partial(nb, 0.0);

    auto block_max = [&](int64_t b) {
        const int64_t lo = b * BLOCK;
        const int64_t hi = std::min(lo + BLOCK, n);
        double m = 0.0;
        for (int64_t j = lo; j < hi; ++j) m = std::max(m, f.row(j).abs().maxCoeff());
        partial[b] = m;
    };

    if (run_parallel(ex)) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
        for (int64_t b = 0; b < nb; ++b) block_max(b);
#endif
    } else {
        for (int64_t b = 0; b < nb; ++b) block_max(b);
    }

    double m = 0.0;
    for (double p : partial) m = std::max(m, p);
    return m;
}

}
