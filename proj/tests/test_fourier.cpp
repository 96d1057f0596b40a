#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "expodelay/calculus.hpp"
#include "expodelay/errors.hpp"
#include "expodelay/fourier_laplace.hpp"
#include "expodelay/space.hpp"
#include "test_util.hpp"

using namespace expodelay;
using namespace testutil;

TEST_CASE("round trip reproduces the input") {
    auto g = TimeGrid::from_step(-2.0, 6.0, 1e-3);
    std::mt19937_64 rng(seed());
    auto f = random_smooth(g, rng, -1.0, 5.0, 2, true);
    Weight w(1.0);

    auto sp = fourier_laplace(f, w);
    CHECK(sp.frequencies.size() >= 2 * g.n);
    CHECK((sp.frequencies.size() & (sp.frequencies.size() - 1)) == 0);
    CHECK(sp.coefficients.rows() == sp.frequencies.size());
    CHECK(sp.coefficients.cols() == 2);
    CHECK(sp.source_n == g.n);

    auto back = fourier_laplace(sp);
    CHECK(back.grid.same(g));
    CHECK(sup_diff(back, f) / sup_abs(f) < 1e-10);
}

TEST_CASE("Parseval: coefficient l2 mass equals the weighted norm") {
    auto g = TimeGrid::from_step(-2.0, 6.0, 1e-3);
    std::mt19937_64 rng(seed() + 1);
    for (double rho : {1.0, 2.0}) {
        auto f = random_smooth(g, rng, -1.0, 4.0, 1, true);
        Weight w(rho);
        auto sp = fourier_laplace(f, w);
        double dxi = sp.frequencies(1) - sp.frequencies(0);
        double mass = std::sqrt((sp.coefficients.abs2().sum()) * dxi);
        double nrm = norm(f, w, 0);
        CHECK(std::abs(mass - nrm) / nrm < 1e-8);
    }
}

TEST_CASE("weighted Gaussian transform matches the closed form") {
    auto g = TimeGrid::from_step(-2.0, 6.0, 1e-3);
    const double mu = 2.0, sigma = 0.5, rho = 1.0;
    auto f = gaussian(g, mu, sigma);
    auto sp = fourier_laplace(f, Weight(rho));

    double worst = 0.0, scale = 0.0;
    for (int64_t p = 0; p < sp.frequencies.size(); ++p) {
        cd a(rho, sp.frequencies(p));
        cd expect = sigma * std::exp(-a * mu + a * a * (sigma * sigma / 2.0));
        worst = std::max(worst, std::abs(sp.coefficients(p, 0) - expect));
        scale = std::max(scale, std::abs(expect));
    }
    CHECK(worst / scale < 1e-6);
}

TEST_CASE("foreign spectra and overflow windows are rejected") {
    auto g = TimeGrid::from_step(0.0, 1.0, 1e-2);
    auto f = indicator(g, 0.0, 1.0);
    auto sp = fourier_laplace(f, Weight(1.0));

    auto bad_len = sp;
    bad_len.frequencies.conservativeResize(bad_len.frequencies.size() - 1);
    CHECK_THROWS_AS(fourier_laplace(bad_len), config_error);

    auto bad_n = sp;
    bad_n.source_n = 0;
    CHECK_THROWS_AS(fourier_laplace(bad_n), config_error);

    auto bad_spacing = sp;
    bad_spacing.frequencies(1) += 1.0;
    CHECK_THROWS_AS(fourier_laplace(bad_spacing), config_error);

    auto far = TimeGrid::from_step(-400.0, -399.0, 1e-2);
    auto one = indicator(far, -400.0, -399.0);
    CHECK_THROWS_AS(fourier_laplace(one, Weight(2.0)), numeric_error);
}

TEST_CASE("identity symbol acts as the identity") {
    auto g = TimeGrid::from_step(-2.0, 6.0, 1e-3);
    std::mt19937_64 rng(seed() + 2);
    auto f = random_smooth(g, rng, -1.0, 4.0);
    auto out = apply_symbol(f, make_identity_symbol(), Weight(1.0));
    CHECK(sup_diff(out, f) / sup_abs(f) < 1e-10);
}

TEST_CASE("integration symbol agrees with the causal integrator") {
    auto g = TimeGrid::from_step(-1.0, 10.0, 1e-3);
    Weight w(2.0);
    auto f = gaussian(g, 2.0, 0.5);
    auto via_symbol = apply_symbol(f, make_integration_symbol(1.0), w);
    auto direct = causal_integrate(f, w);
    CHECK(sup_diff(via_symbol, direct) < 1e-5);
}

TEST_CASE("delay symbol equals translation on smooth interior data") {
    auto g = TimeGrid::from_step(-1.0, 10.0, 1e-3);
    Weight w(2.0);
    auto f = gaussian(g, 2.0, 0.5);

    auto shifted = apply_symbol(f, make_delay_symbol(1.0), w);
    auto expected = translate(f, -1.0);
    CHECK(sup_diff(shifted, expected) / sup_abs(f) < 1e-6);

    auto two_step = apply_symbol(apply_symbol(f, make_delay_symbol(0.4), w),
                                 make_delay_symbol(0.6), w);
    CHECK(sup_diff(two_step, shifted) / sup_abs(f) < 1e-8);
}

TEST_CASE("fractional powers: endpoint, semigroup, Riemann-Liouville half step") {
    auto g = TimeGrid::from_step(-1.0, 10.0, 1e-3);
    Weight w(2.0);

    auto f = gaussian(g, 2.0, 0.5);
    auto whole = apply_symbol(f, make_fractional_symbol(1.0), w);
    CHECK(sup_diff(whole, causal_integrate(f, w)) < 1e-5);

    // Pointwise accuracy decays like e^{rho t} toward the right edge (the
    // weighted noise floor is amplified on unweighting), so the semigroup law
    // is measured in the weighted norm and on the interior.
    auto half = make_fractional_symbol(0.5);
    auto twice = apply_symbol(apply_symbol(f, half, w), half, w);
    GridFunction gap(g, 1);
    gap.samples = twice.samples - whole.samples;
    CHECK(norm(gap, w, 0) / norm(whole, w, 0) < 1e-6);
    CHECK(sup_diff_on(twice, whole, -1.0, 6.0) / sup_abs(f) < 1e-6);

    // Half integral of the unit step is 2 sqrt(t/pi); the jump at 0 makes the
    // error O(sqrt(dt)) near the origin, decaying along the window.
    auto step = heaviside(g);
    auto rl = apply_symbol(step, half, Weight(1.5));
    auto closed = from_fn(g, [](double t) {
        return cd(t > 0 ? 2.0 * std::sqrt(t / M_PI) : 0.0, 0.0);
    });
    double dt = g.dt();
    CHECK(sup_diff_on(rl, closed, 2 * dt, 5.0) < 7e-3);
    CHECK(sup_diff_on(rl, closed, 0.0, 5.0) < 3e-2);
    CHECK(sup_diff_on(rl, closed, 0.5, 4.0) < 1e-3);
}

TEST_CASE("convolution symbol: box kernel against the tent") {
    auto kg = TimeGrid::from_step(0.0, 1.0, 1e-3);
    auto kernel = indicator(kg, 0.0, 1.0);
    auto sym = make_convolution_symbol(kernel);
    CHECK(sym.norm_bound == doctest::Approx(1.0).epsilon(1e-12));

    auto g = TimeGrid::from_step(-1.0, 6.0, 1e-3);
    auto f = indicator(g, 0.0, 1.0);
    auto out = apply_symbol(f, sym, Weight(2.0));
    auto tent = from_fn(g, [](double t) {
        double v = 1.0 - std::abs(t - 1.0);
        return cd(v > 0 ? v : 0.0, 0.0);
    });
    CHECK(sup_diff(out, tent) < 2e-3);
}

TEST_CASE("symbol application is nearly independent of the weight") {
    auto g = TimeGrid::from_step(-2.0, 6.0, 1e-3);
    std::mt19937_64 rng(seed() + 3);
    auto f = random_smooth(g, rng, -1.0, 3.0);
    for (const auto& sym : {make_delay_symbol(1.0), make_fractional_symbol(0.5)}) {
        auto at2 = apply_symbol(f, sym, Weight(2.0));
        auto at4 = apply_symbol(f, sym, Weight(4.0));
        // interior sup plus agreement in the stronger weighted norm; the far
        // right edge only carries amplified noise below either weight.
        CHECK(sup_diff_on(at2, at4, -2.0, 3.0) / sup_abs(f) < 1e-6);
        GridFunction gap(g, 1);
        gap.samples = at2.samples - at4.samples;
        CHECK(norm(gap, Weight(4.0), 0) / norm(f, Weight(4.0), 0) < 1e-6);
    }
}

TEST_CASE("symbol application is causal") {
    auto g = TimeGrid::from_step(-1.0, 10.0, 1e-3);
    Weight w(2.0);
    std::mt19937_64 rng(seed() + 4);
    auto f1 = random_smooth(g, rng, 0.0, 4.0);
    auto f2 = f1;
    f2.samples += gaussian(g, 3.2, 0.15).samples;  // perturbation lives above t = 2.5

    Eigen::MatrixXcd a(1, 1), b(1, 1), c(1, 1);
    a(0, 0) = 0.5;
    b(0, 0) = 0.25;
    c(0, 0) = 0.5;
    std::vector<Symbol> lib = {make_delay_symbol(1.0), make_fractional_symbol(0.5),
                               make_matrix_affine_symbol(a, b, 1.0),
                               make_neutral_resolvent_symbol(c, 1.0, 1.0)};
    auto kg = TimeGrid::from_step(0.0, 1.0, 1e-3);
    lib.push_back(make_convolution_symbol(indicator(kg, 0.0, 1.0)));

    for (const auto& sym : lib) {
        auto o1 = apply_symbol(f1, sym, w);
        auto o2 = apply_symbol(f2, sym, w);
        double scale = std::max(1.0, sup_abs(o1));
        CHECK(sup_diff_on(o1, o2, -1.0, 2.0) / scale < 1e-8);
    }
}

TEST_CASE("output norm respects the symbol bound") {
    auto g = TimeGrid::from_step(-1.0, 10.0, 1e-3);
    Weight w(2.0);
    std::mt19937_64 rng(seed() + 5);

    Eigen::MatrixXcd a(1, 1), b(1, 1), c(1, 1);
    a(0, 0) = 0.5;
    b(0, 0) = 0.25;
    c(0, 0) = 0.5;
    auto kg = TimeGrid::from_step(0.0, 1.0, 1e-3);
    std::vector<Symbol> lib = {make_identity_symbol(),
                               make_integration_symbol(1.0),
                               make_delay_symbol(1.0),
                               make_fractional_symbol(0.5),
                               make_convolution_symbol(indicator(kg, 0.0, 1.0)),
                               make_matrix_affine_symbol(a, b, 1.0),
                               make_neutral_resolvent_symbol(c, 1.0, 1.0)};
    for (const auto& sym : lib) {
        for (int trial = 0; trial < 5; ++trial) {
            auto f = random_smooth(g, rng, 0.0, 4.0, 1, true);
            auto out = apply_symbol(f, sym, w);
            CHECK(norm(out, w, 0) <= sym.norm_bound * norm(f, w, 0) * (1.0 + 1e-6));
        }
    }
}

TEST_CASE("symbol bounds dominate the sampled points") {
    auto g = TimeGrid::from_step(-1.0, 10.0, 1e-3);
    auto sp = fourier_laplace(GridFunction::zero(g), Weight(2.0));

    Eigen::MatrixXcd a(2, 2), b(2, 2), c(1, 1);
    a << 0.0, 1.0, 0.0, 0.0;
    b << 0.3, 0.0, 0.0, 0.3;
    c(0, 0) = 0.5;
    auto kg = TimeGrid::from_step(0.0, 1.0, 1e-3);
    std::vector<Symbol> lib = {make_integration_symbol(1.0),
                               make_delay_symbol(1.0),
                               make_fractional_symbol(0.5),
                               make_convolution_symbol(indicator(kg, 0.0, 1.0)),
                               make_matrix_affine_symbol(a, b, 1.0),
                               make_neutral_resolvent_symbol(c, 1.0, 1.0)};
    for (const auto& sym : lib) {
        double worst = 0.0;
        for (int64_t p = 0; p < sp.frequencies.size(); p += 7) {
            cd z = 1.0 / (cd(0.0, sp.frequencies(p)) + 2.0);
            Eigen::MatrixXcd m = sym.evaluate(z);
            worst = std::max(worst, Eigen::JacobiSVD<Eigen::MatrixXcd>(m).singularValues()(0));
        }
        CHECK(worst <= sym.norm_bound * (1.0 + 1e-12));
    }
}

TEST_CASE("neutral resolvent equals its Neumann series of shifts") {
    auto g = TimeGrid::from_step(-1.0, 10.0, 1e-3);
    Weight w(2.0);
    auto f = gaussian(g, 1.5, 0.3);
    Eigen::MatrixXcd c(1, 1);
    c(0, 0) = 0.5;
    auto out = apply_symbol(f, make_neutral_resolvent_symbol(c, 1.0, 1.0), w);

    GridFunction series(g, 1);
    for (int m = 0; m < 12; ++m)
        series.samples += std::pow(0.5, m) * translate(f, -static_cast<double>(m)).samples;
    CHECK(sup_diff(out, series) / sup_abs(f) < 1e-8);
}

TEST_CASE("affine matrix symbol mixes components") {
    auto g = TimeGrid::from_step(-1.0, 10.0, 1e-3);
    Weight w(2.0);
    std::mt19937_64 rng(seed() + 6);
    auto f = random_smooth(g, rng, 0.0, 4.0, 2, true);

    Eigen::MatrixXcd a(2, 2), b(2, 2);
    a << 0.0, 1.0, 0.0, 0.0;
    b << 0.3, 0.0, 0.0, 0.3;
    auto out = apply_symbol(f, make_matrix_affine_symbol(a, b, 1.0), w);

    auto shifted = translate(f, -1.0);
    GridFunction expected(g, 2);
    expected.samples.col(0) = f.samples.col(1) + 0.3 * shifted.samples.col(0);
    expected.samples.col(1) = 0.3 * shifted.samples.col(1);
    CHECK(sup_diff(out, expected) / sup_abs(f) < 1e-6);
}

TEST_CASE("constructor and application guards") {
    CHECK_THROWS_AS(make_fractional_symbol(1.2), config_error);
    CHECK_THROWS_AS(make_fractional_symbol(-0.1), config_error);
    CHECK_THROWS_AS(make_delay_symbol(0.0), config_error);
    CHECK_THROWS_AS(make_integration_symbol(0.0), config_error);

    Eigen::MatrixXcd big(1, 1);
    big(0, 0) = 2.0;
    CHECK_THROWS_AS(make_neutral_resolvent_symbol(big, 1.0, 0.5), config_error);

    auto kg = TimeGrid::from_step(-1.0, 1.0, 1e-2);
    CHECK_THROWS_AS(make_convolution_symbol(indicator(kg, -1.0, 1.0)), config_error);

    auto g = TimeGrid::from_step(-2.0, 6.0, 1e-3);
    std::mt19937_64 rng(seed() + 7);
    auto f = random_smooth(g, rng, -1.0, 3.0);

    // rho below the symbol's admissible range
    CHECK_THROWS_AS(apply_symbol(f, make_fractional_symbol(0.5), Weight(0.4)), config_error);

    // padding shorter than the shift: total wrap
    auto tiny = TimeGrid::from_step(0.0, 1.0, 1e-3);
    auto short_f = indicator(tiny, 0.0, 0.5);
    CHECK_THROWS_AS(apply_symbol(short_f, make_delay_symbol(3.0), Weight(2.0)), numeric_error);

    // explicit tail tolerance tighter than the wrap estimate
    CHECK_THROWS_AS(apply_symbol(f, make_fractional_symbol(0.5), Weight(2.0), 1e-15),
                    numeric_error);

    // undecayed signal at the right edge of the window
    auto grow = from_fn(TimeGrid::from_step(0.0, 5.0, 1e-3),
                        [](double t) { return cd(std::exp(3.0 * t), 0.0); });
    CHECK_THROWS_AS(apply_symbol(grow, make_delay_symbol(1.0), Weight(2.0)), numeric_error);

    // dimension mismatch between symbol and data
    Eigen::MatrixXcd a2 = Eigen::MatrixXcd::Zero(2, 2), b2 = Eigen::MatrixXcd::Zero(2, 2);
    CHECK_THROWS_AS(apply_symbol(f, make_matrix_affine_symbol(a2, b2, 1.0), Weight(2.0)),
                    config_error);
}
