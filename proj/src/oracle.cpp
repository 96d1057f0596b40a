#include "expodelay/oracle.hpp"

#include <cmath>

#include "expodelay/errors.hpp"

namespace expodelay {

namespace {

// Cubic Hermite on one fine cell; the stored derivative is the equation's
// right-hand side, so the interpolant is locally O(dt^4) accurate.
Eigen::VectorXcd hermite(const Eigen::VectorXcd& u0, const Eigen::VectorXcd& d0,
                         const Eigen::VectorXcd& u1, const Eigen::VectorXcd& d1,
                         double s, double dt) {
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * u0 + (s3 - 2 * s2 + s) * dt * d0 +
           (-2 * s3 + 3 * s2) * u1 + (s3 - s2) * dt * d1;
}

}  // namespace

GridFunction method_of_steps(const StepsProblem& p, const TimeGrid& grid, int refine) {
    const int d = p.dim;
    if (d < 1) throw config_error("state dimension must be >= 1");
    if (refine < 1) throw config_error("oracle refinement must be >= 1");
    if (p.thetas.size() != p.coeffs.size())
        throw config_error("steps oracle needs one coefficient per delay");
    if (p.thetas.empty()) throw config_error("steps oracle needs at least one term");
    const double dtf = grid.dt() / refine;
    Eigen::MatrixXcd local = Eigen::MatrixXcd::Zero(d, d);
    std::vector<double> lags;
    std::vector<Eigen::MatrixXcd> lag_coeffs;
    for (size_t i = 0; i < p.thetas.size(); ++i) {
        const double th = p.thetas[i];
        if (!std::isfinite(th) || th > 0.0)
            throw config_error("delay offsets must be finite and <= 0");
        if (p.coeffs[i].rows() != d || p.coeffs[i].cols() != d)
            throw config_error("coefficient matrices must be d x d");
        if (th == 0.0) {
            local += p.coeffs[i];
        } else {
            if (-th < dtf) throw config_error("delay shorter than the oracle step");
            lags.push_back(th);
            lag_coeffs.push_back(p.coeffs[i]);
        }
    }
    const bool neutral = p.C.size() > 0 && p.C.cwiseAbs().maxCoeff() > 0.0;
    if (neutral) {
        if (p.C.rows() != d || p.C.cols() != d)
            throw config_error("coefficient matrices must be d x d");
        if (!(p.h1 > 0.0) || !std::isfinite(p.h1) || p.h1 < dtf)
            throw config_error("difference delay h1 must be positive");
    }

    auto hist = [&](double t) {
        return p.history ? p.history(t) : Eigen::VectorXcd::Zero(d).eval();
    };
    auto hist_deriv = [&](double t) {
        if (!p.history) return Eigen::VectorXcd::Zero(d).eval();
        return ((p.history(t + dtf) - p.history(t - dtf)) / (2.0 * dtf)).eval();
    };

    const auto nf = grid.t_max > 0.0
                        ? static_cast<int64_t>(std::llround(grid.t_max / dtf))
                        : int64_t(0);
    std::vector<Eigen::VectorXcd> u(nf + 1), du(nf + 1);
    int64_t filled = 0;  // nodes of u/du already final

    auto value_at = [&](double t) -> Eigen::VectorXcd {
        if (t <= 0.0) return hist(t);
        const double x = t / dtf;
        auto i = static_cast<int64_t>(std::floor(x));
        if (i >= filled) i = filled - 1;
        if (i >= nf) return u[nf];
        return hermite(u[i], du[i], u[i + 1], du[i + 1], x - static_cast<double>(i), dtf);
    };
    auto deriv_at = [&](double t) -> Eigen::VectorXcd {
        if (t <= 0.0) return hist_deriv(t);
        const double x = t / dtf;
        auto i = static_cast<int64_t>(std::floor(x));
        if (i >= filled) i = filled - 1;
        if (i >= nf) return du[nf];
        const double s = x - static_cast<double>(i);
        return ((1.0 - s) * du[i] + s * du[i + 1]).eval();
    };
    auto rhs = [&](double t, const Eigen::VectorXcd& y) {
        Eigen::VectorXcd v = local * y;
        for (size_t i = 0; i < lags.size(); ++i) v += lag_coeffs[i] * value_at(t + lags[i]);
        if (neutral) v += p.C * deriv_at(t - p.h1);
        if (p.source) v += p.source(t);
        return v;
    };

    if (nf > 0) {
        u[0] = hist(0.0);
        du[0] = rhs(0.0, u[0]);
        filled = 1;
        for (int64_t i = 0; i < nf; ++i) {
            const double t = static_cast<double>(i) * dtf;
            const Eigen::VectorXcd& y = u[i];
            const Eigen::VectorXcd k1 = rhs(t, y);
            const Eigen::VectorXcd k2 = rhs(t + 0.5 * dtf, y + 0.5 * dtf * k1);
            const Eigen::VectorXcd k3 = rhs(t + 0.5 * dtf, y + 0.5 * dtf * k2);
            const Eigen::VectorXcd k4 = rhs(t + dtf, y + dtf * k3);
            u[i + 1] = y + dtf / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            du[i + 1] = rhs(t + dtf, u[i + 1]);
            filled = i + 2;
        }
    }

    GridFunction out(grid, d);
    for (int64_t j = 0; j < grid.n; ++j) {
        const double t = grid.t(j);
        Eigen::VectorXcd v;
        if (t < -grid.dt() / 4) {
            v = hist(t);
        } else {
            auto i = static_cast<int64_t>(std::llround(t / dtf));
            if (i < 0) i = 0;
            v = (nf > 0 && i <= nf) ? u[i] : hist(0.0);
        }
        if (v.size() != d) throw config_error("history returned the wrong dimension");
        out.samples.row(j) = v.transpose().array();
    }
    return out;
}

}
