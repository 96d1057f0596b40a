#include "expodelay/fourier_laplace.hpp"

#include <cmath>
#include <complex>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "expodelay/errors.hpp"
#include "expodelay/kernels.hpp"

namespace expodelay {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

// FFTW planning is not thread-safe; execution on distinct buffers is.
void run_dft(std::vector<cd>& buf, int64_t len, int64_t batch, int sign) {
    auto* raw = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        int n0 = static_cast<int>(len);
        plan = fftw_plan_many_dft(1, &n0, static_cast<int>(batch), raw, nullptr, 1, n0,
                                  raw, nullptr, 1, n0, sign, FFTW_ESTIMATE);
    }
    if (plan == nullptr) throw numeric_error("transform planning failed");
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(plan);
    }
}

int64_t padded_length(int64_t n) {
    int64_t len = 1;
    while (len < 2 * n) len <<= 1;
    return len;
}

double spectral_norm(const Eigen::MatrixXcd& m) {
    return Eigen::JacobiSVD<Eigen::MatrixXcd>(m).singularValues()(0);
}

}  // namespace

Spectrum fourier_laplace(const GridFunction& f, Weight w) {
    const int64_t n = f.grid.n;
    const int64_t d = f.dim;
    const double dt = f.grid.dt();

    Eigen::ArrayXXcd weighted;
    kernels::scale_exp(f.samples, f.grid.t_min, dt, -w.rho, weighted, kernels::default_exec());
    if (!weighted.allFinite())
        throw numeric_error("weighted samples leave floating range; window too wide for this rho");

    const int64_t len = padded_length(n);
    std::vector<cd> buf(static_cast<size_t>(len * d), cd(0.0, 0.0));
    for (int64_t c = 0; c < d; ++c)
        for (int64_t j = 0; j < n; ++j) buf[static_cast<size_t>(c * len + j)] = weighted(j, c);

    run_dft(buf, len, d, FFTW_FORWARD);

    Spectrum sp;
    sp.origin = f.grid.t_min;
    sp.rho = w.rho;
    sp.source_n = n;
    sp.dt = dt;
    sp.frequencies.resize(len);
    sp.coefficients.resize(len, d);
    const double scale = dt / std::sqrt(2.0 * kPi);
    for (int64_t p = 0; p < len; ++p) {
        const int64_t k = p - len / 2;
        const double xi = 2.0 * kPi * static_cast<double>(k) / (static_cast<double>(len) * dt);
        sp.frequencies(p) = xi;
        const cd phase = scale * std::exp(cd(0.0, -xi * f.grid.t_min));
        const int64_t m = (p + len / 2) % len;
        for (int64_t c = 0; c < d; ++c)
            sp.coefficients(p, c) = phase * buf[static_cast<size_t>(c * len + m)];
    }
    return sp;
}

GridFunction fourier_laplace(const Spectrum& sp) {
    const int64_t len = sp.frequencies.size();
    const int64_t d = sp.coefficients.cols();
    if (len < 4 || (len & (len - 1)) != 0 || sp.coefficients.rows() != len)
        throw config_error("spectrum has foreign shape: padded length must be a power of two");
    if (sp.source_n < 2 || len < 2 * sp.source_n || !(sp.dt > 0.0))
        throw config_error("spectrum has foreign shape: source grid metadata invalid");
    const double step = 2.0 * kPi / (static_cast<double>(len) * sp.dt);
    if (std::abs(sp.frequencies(1) - sp.frequencies(0) - step) > 1e-9 * step)
        throw config_error("spectrum has foreign shape: frequency spacing mismatch");

    std::vector<cd> buf(static_cast<size_t>(len * d), cd(0.0, 0.0));
    const double scale = sp.dt / std::sqrt(2.0 * kPi);
    for (int64_t p = 0; p < len; ++p) {
        const double xi = sp.frequencies(p);
        const cd phase = std::exp(cd(0.0, xi * sp.origin)) / scale;
        const int64_t m = (p + len / 2) % len;
        for (int64_t c = 0; c < d; ++c)
            buf[static_cast<size_t>(c * len + m)] = phase * sp.coefficients(p, c);
    }

    run_dft(buf, len, d, FFTW_BACKWARD);

    const int64_t n = sp.source_n;
    TimeGrid grid(sp.origin, sp.origin + static_cast<double>(n - 1) * sp.dt, n);
    GridFunction out(grid, static_cast<int>(d));
    Eigen::ArrayXXcd weighted(n, d);
    const double inv_len = 1.0 / static_cast<double>(len);
    for (int64_t c = 0; c < d; ++c)
        for (int64_t j = 0; j < n; ++j) weighted(j, c) = buf[static_cast<size_t>(c * len + j)] * inv_len;
    kernels::scale_exp(weighted, sp.origin, sp.dt, sp.rho, out.samples, kernels::default_exec());
    if (!out.finite()) throw numeric_error("inverse transform leaves floating range");
    return out;
}

GridFunction apply_symbol(const GridFunction& f, const Symbol& s, Weight w, double tail_tol,
                          bool edge_guard) {
    if (!s.evaluate) throw config_error("symbol has no evaluate map");
    if (!(w.rho > 0.0)) throw config_error("apply_symbol needs rho > 0");
    if (!(s.radius > 0.0)) throw config_error("symbol radius must be positive");
    if (!(w.rho > 0.5 / s.radius))
        throw config_error("rho too small for symbol '" + s.label + "': need rho > 1/(2 radius)");
    if (s.dim != 1 && s.dim != f.dim)
        throw config_error("symbol dimension does not match function dimension");
    if (!(tail_tol > 0.0)) throw config_error("tail tolerance must be positive");

    Spectrum sp = fourier_laplace(f, w);
    const int64_t len = sp.frequencies.size();
    const double dt = f.grid.dt();
    const double pad_len = static_cast<double>(len - f.grid.n) * dt;

    const double wrap = s.wrap_estimate ? s.wrap_estimate(w.rho, pad_len)
                                        : std::exp(-w.rho * pad_len);
    if (!(wrap <= tail_tol))
        throw numeric_error("window too small for symbol '" + s.label +
                            "': circular wrap estimate above tolerance");

    // The grid truncates at t_max; undecayed weighted mass there is unmodelled.
    if (edge_guard) {
        Eigen::ArrayXXcd weighted;
        kernels::scale_exp(f.samples, f.grid.t_min, dt, -w.rho, weighted, kernels::default_exec());
        const double peak = weighted.abs().maxCoeff();
        if (peak > 0.0) {
            const int64_t edge_rows = std::min<int64_t>(8, f.grid.n);
            const double edge = weighted.bottomRows(edge_rows).abs().maxCoeff();
            if (edge > tail_tol * peak)
                throw numeric_error("signal has not decayed at t_max under this weight");
        }
    }

    const bool scalar = (s.dim == 1);
    for (int64_t p = 0; p < len; ++p) {
        const cd z = 1.0 / (cd(0.0, sp.frequencies(p)) + w.rho);
        const Eigen::MatrixXcd m = s.evaluate(z);
        if (scalar) {
            if (m.rows() != 1 || m.cols() != 1)
                throw config_error("scalar symbol returned a non-scalar value");
            sp.coefficients.row(p) *= m(0, 0);
        } else {
            if (m.rows() != s.dim || m.cols() != s.dim)
                throw config_error("symbol returned a matrix of wrong shape");
            Eigen::VectorXcd row = sp.coefficients.row(p).matrix().transpose();
            sp.coefficients.row(p) = (m * row).transpose().array();
        }
    }

    GridFunction out = fourier_laplace(sp);
    out.grid = f.grid;
    return out;
}

Symbol make_identity_symbol(int64_t dim) {
    if (dim < 1) throw config_error("identity symbol needs dim >= 1");
    Symbol s;
    s.label = "identity";
    s.dim = dim;
    s.radius = 1e300;
    s.norm_bound = 1.0;
    s.evaluate = [dim](cd) { return Eigen::MatrixXcd::Identity(dim, dim); };
    s.wrap_estimate = [](double, double) { return 0.0; };
    return s;
}

Symbol make_integration_symbol(double rho_min) {
    if (!(rho_min > 0.0)) throw config_error("integration symbol needs rho_min > 0");
    Symbol s;
    s.label = "integrate";
    s.dim = 1;
    s.radius = 0.5 / rho_min;
    s.norm_bound = 1.0 / rho_min;  // sup |z| over the closed ball
    s.evaluate = [](cd z) {
        Eigen::MatrixXcd m(1, 1);
        m(0, 0) = z;
        return m;
    };
    return s;
}

Symbol make_delay_symbol(double h) {
    if (!(h > 0.0)) throw config_error("delay symbol needs h > 0");
    Symbol s;
    s.label = "delay";
    s.dim = 1;
    s.radius = 1e300;
    s.norm_bound = 1.0;  // |e^{-h/z}| = e^{-h Re(1/z)} <= 1 on the right half-plane
    s.evaluate = [h](cd z) {
        Eigen::MatrixXcd m(1, 1);
        m(0, 0) = std::exp(-h / z);
        return m;
    };
    // Kernel is delta_h: no wrap at all once the padding exceeds the shift.
    s.wrap_estimate = [h](double, double pad_len) { return pad_len > h ? 0.0 : 1.0; };
    return s;
}

Symbol make_fractional_symbol(double alpha, double rho_min) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw config_error("fractional order must lie in [0, 1]");
    if (!(rho_min > 0.0)) throw config_error("fractional symbol needs rho_min > 0");
    Symbol s;
    s.label = "fractional";
    s.dim = 1;
    s.radius = 0.5 / rho_min;
    s.norm_bound = 1.1 * std::pow(2.0 * s.radius, alpha);  // sup |z^alpha| with margin
    s.evaluate = [alpha](cd z) {
        Eigen::MatrixXcd m(1, 1);
        m(0, 0) = std::pow(z, alpha);  // principal branch; Re z > 0 on the ball
        return m;
    };
    return s;
}

Symbol make_convolution_symbol(const GridFunction& kernel) {
    if (kernel.dim != 1) throw config_error("convolution kernel must be scalar");
    if (kernel.grid.t_min < -kernel.grid.dt() / 4)
        throw config_error("convolution kernel must have inf supp = 0");
    const int64_t nk = kernel.grid.n;
    const double dk = kernel.grid.dt();
    Eigen::ArrayXcd vals = kernel.samples.col(0);
    Eigen::ArrayXd times(nk);
    for (int64_t j = 0; j < nk; ++j) times(j) = std::max(0.0, kernel.grid.t(j));
    Eigen::ArrayXd quad = Eigen::ArrayXd::Constant(nk, dk);
    quad(0) = dk / 2;
    quad(nk - 1) = dk / 2;

    Symbol s;
    s.label = "convolution";
    s.dim = 1;
    s.radius = 1e300;
    s.norm_bound = (quad * vals.abs()).sum();  // L1 bound, valid on any ball
    s.evaluate = [vals, times, quad, nk](cd z) {
        const cd inv = 1.0 / z;
        cd acc(0.0, 0.0);
        for (int64_t j = 0; j < nk; ++j) acc += quad(j) * vals(j) * std::exp(-times(j) * inv);
        Eigen::MatrixXcd m(1, 1);
        m(0, 0) = acc;
        return m;
    };
    const double reach = kernel.grid.t_max;
    s.wrap_estimate = [reach](double, double pad_len) { return pad_len > reach ? 0.0 : 1.0; };
    return s;
}

Symbol make_matrix_affine_symbol(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B, double h) {
    if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows() || A.rows() < 1)
        throw config_error("affine symbol needs square matrices of equal size");
    if (!(h >= 0.0)) throw config_error("affine symbol needs h >= 0");
    Symbol s;
    s.label = "affine";
    s.dim = A.rows();
    s.radius = 1e300;
    s.norm_bound = spectral_norm(A) + spectral_norm(B);
    s.evaluate = [A, B, h](cd z) { return Eigen::MatrixXcd(A + B * std::exp(-h / z)); };
    s.wrap_estimate = [h](double, double pad_len) { return pad_len > h ? 0.0 : 1.0; };
    return s;
}

Symbol make_neutral_resolvent_symbol(const Eigen::MatrixXcd& C, double h, double rho_min) {
    if (C.rows() != C.cols() || C.rows() < 1) throw config_error("resolvent symbol needs a square matrix");
    if (!(h > 0.0)) throw config_error("resolvent symbol needs h > 0");
    if (!(rho_min > 0.0)) throw config_error("resolvent symbol needs rho_min > 0");
    const double norm_c = spectral_norm(C);
    const double q0 = norm_c * std::exp(-h * rho_min);
    if (q0 >= 1.0)
        throw config_error("resolvent not invertible: |C| e^{-h rho} >= 1 at rho_min");
    const int64_t d = C.rows();
    Symbol s;
    s.label = "neutral_resolvent";
    s.dim = d;
    s.radius = 0.5 / rho_min;
    s.norm_bound = 1.0 / (1.0 - q0);
    s.evaluate = [C, h, d](cd z) {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(d, d) - C * std::exp(-h / z);
        return Eigen::MatrixXcd(m.partialPivLu().solve(Eigen::MatrixXcd::Identity(d, d)));
    };
    // Neumann tail: the kernel is sum_m C^m delta_{mh}; terms past the padding
    // carry weighted mass q^m with q = |C| e^{-rho h}.
    s.wrap_estimate = [norm_c, h](double rho, double pad_len) {
        const double q = norm_c * std::exp(-rho * h);
        if (q >= 1.0) return 1.0;
        const double m0 = std::floor(pad_len / h) + 1.0;
        return std::pow(q, m0) / (1.0 - q);
    };
    return s;
}

}
