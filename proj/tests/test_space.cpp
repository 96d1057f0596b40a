#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "expodelay/calculus.hpp"
#include "expodelay/space.hpp"
#include "test_util.hpp"

using namespace expodelay;
using namespace testutil;

TEST_CASE("inner product of the unit box against the closed form") {
    // integral_0^1 e^{-2x} dx = (1 - e^{-2})/2
    auto g = TimeGrid::from_step(-1.0, 3.0, 1e-3);
    auto f = indicator(g, 0.0, 1.0);
    double expected = (1.0 - std::exp(-2.0)) / 2.0;
    cd got = inner_product(f, f, Weight(1.0));
    CHECK(std::abs(got.imag()) < 1e-14);
    CHECK(got.real() == doctest::Approx(expected).epsilon(3e-3));
    CHECK(norm(f, Weight(1.0), 0) == doctest::Approx(std::sqrt(expected)).epsilon(2e-3));
}

TEST_CASE("inner product trivia: zero argument, disjoint supports") {
    auto g = TimeGrid::from_step(-1.0, 4.0, 1e-3);
    auto f = indicator(g, 0.0, 1.0);
    auto z = GridFunction::zero(g, 1);
    CHECK(std::abs(inner_product(f, z, Weight(2.0))) == 0.0);
    auto h = indicator(g, 2.0, 3.0);
    CHECK(std::abs(inner_product(f, h, Weight(1.0))) == 0.0);
}

TEST_CASE("inner product is conjugate-linear in the first argument") {
    auto g = TimeGrid::from_step(-1.0, 2.0, 1e-3);
    std::mt19937_64 rng(seed());
    auto f = random_smooth(g, rng, -0.5, 1.5, 1, true);
    auto h = random_smooth(g, rng, -0.5, 1.5, 1, true);
    cd a(0.3, -0.7);
    GridFunction af = f;
    af.samples *= a;
    cd lhs = inner_product(af, h, Weight(1.0));
    cd rhs = std::conj(a) * inner_product(f, h, Weight(1.0));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
}

TEST_CASE("grid mismatch is rejected") {
    auto g1 = TimeGrid::from_step(0.0, 1.0, 1e-2);
    auto g2 = TimeGrid::from_step(0.0, 2.0, 1e-2);
    CHECK_THROWS_AS(inner_product(GridFunction::zero(g1, 1), GridFunction::zero(g2, 1), Weight(1.0)),
                    config_error);
}

TEST_CASE("Cauchy-Schwarz on random pairs") {
    auto g = TimeGrid::from_step(-2.0, 4.0, 2e-3);
    std::mt19937_64 rng(seed());
    for (int i = 0; i < 20; ++i) {
        auto f = random_smooth(g, rng, -1.5, 3.5, 1, true);
        auto h = random_smooth(g, rng, -1.5, 3.5, 1, true);
        Weight w(1.0 + i % 3);
        CHECK(std::abs(inner_product(f, h, w)) <= norm(f, w, 0) * norm(h, w, 0) * (1 + 1e-12));
    }
}

TEST_CASE("embedding |f| <= (1/rho)|f|_1 on random smooth bumps") {
    auto g = TimeGrid::from_step(-2.0, 6.0, 1e-3);
    std::mt19937_64 rng(seed());
    for (double rho : {1.0, 2.0, 4.0}) {
        for (int i = 0; i < 10; ++i) {
            auto f = random_smooth(g, rng, -1.0, 5.0);
            Weight w(rho);
            CHECK(norm(f, w, 0) <= (1.0 / rho) * norm(f, w, 1) * (1 + 1e-6) + 1e-12);
        }
    }
}

TEST_CASE("norm k=1 is the rho,0 norm of f' + rho f") {
    auto g = TimeGrid::from_step(-1.0, 3.0, 1e-3);
    auto f = gaussian(g, 1.0, 0.2);
    Weight w(2.0);
    GridFunction d = derivative(f);
    d.samples += w.rho * f.samples;
    CHECK(norm(f, w, 1) == doctest::Approx(norm(d, w, 0)).epsilon(1e-14));
}

TEST_CASE("window enlargement leaves the norm of compactly supported f alone") {
    auto g1 = TimeGrid::from_step(-1.0, 3.0, 1e-3);
    auto g2 = TimeGrid::from_step(-3.0, 6.0, 1e-3);
    auto f1 = gaussian(g1, 1.0, 0.15);
    auto f2 = gaussian(g2, 1.0, 0.15);
    double n1 = norm(f1, Weight(1.0), 0);
    double n2 = norm(f2, Weight(1.0), 0);
    CHECK(std::abs(n1 - n2) <= 1e-12 * n2);
}

TEST_CASE("scalar scaling scales norms exactly") {
    auto g = TimeGrid::from_step(-1.0, 2.0, 1e-3);
    auto f = gaussian(g, 0.5, 0.2);
    GridFunction h = f;
    h.samples *= cd(-3.0, 4.0);  // |c| = 5
    for (int k : {0, 1})
        CHECK(norm(h, Weight(1.5), k) == doctest::Approx(5.0 * norm(f, Weight(1.5), k)).epsilon(1e-13));
}

TEST_CASE("resample: identity grid bitwise, affine data exact, offset box bounded") {
    auto g = TimeGrid::from_step(0.0, 2.0, 1e-3);
    std::mt19937_64 rng(seed());
    auto f = random_smooth(g, rng, 0.2, 1.8);
    auto r = resample(f, g);
    CHECK((r.samples == f.samples).all());

    auto ramp = from_fn(g, [](double t) { return cd(2.0 * t - 0.3, 0.0); });
    auto g2 = TimeGrid::from_step(0.0, 2.0, 5e-4);
    auto r2 = resample(ramp, g2);
    for (int64_t j = 1; j + 1 < g2.n; ++j)
        CHECK(std::abs(r2.samples(j, 0) - cd(2.0 * g2.t(j) - 0.3, 0.0)) < 1e-12);

    auto box = indicator(g, 0.5, 1.0);
    TimeGrid g3(0.0 + 5e-4, 2.0 + 5e-4, g.n);
    auto r3 = resample(box, g3);
    CHECK(r3.samples.abs().maxCoeff() <= 1.0 + 1e-15);
}

TEST_CASE("weight requires nonzero rho") { CHECK_THROWS_AS(Weight(0.0), config_error); }
