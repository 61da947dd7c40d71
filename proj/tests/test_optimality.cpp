#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oscint/optimality.hpp"

using namespace oscint;

TEST_CASE("stationary point of the rescaled phase") {
    for (double w : {1.0, -1.0}) {
        Point omega{w, 0};
        Point s = counterexample1_stationary_point(8.0, omega);
        CHECK(s[0] == doctest::Approx(-w / 10.0));
        auto [ge, gx] = counterexample1_rescaled_gradient(8.0, omega, s, s);
        CHECK(std::abs(ge[0]) < 1e-15);
        CHECK(std::abs(gx[0]) < 1e-15);
    }
    auto [ge, gx] = counterexample1_rescaled_gradient(4.0, {1, 0}, {-0.1, 0}, {-0.1, 0});
    CHECK(std::abs(ge[0]) > 0.1);
    (void)gx;
}

TEST_CASE("counterexample 1 validation") {
    CounterexampleOneConfig c;
    c.grid = GridSpec(1, 256, 20.0);
    CHECK_THROWS_AS(counterexample1_ratio(c), std::invalid_argument);
    c.probes = {19.9};
    CHECK_THROWS_AS(counterexample1_ratio(c), std::invalid_argument);
    c.probes = {5.0};
    c.mu = 0.0;
    CHECK_THROWS_AS(counterexample1_ratio(c), std::invalid_argument);
}

TEST_CASE("counterexample 1 compensated ratio flattens on a large grid") {
    CounterexampleOneConfig c;
    c.grid = GridSpec(1, 8192, 215.0);
    c.taper_lo = 20.0;
    c.taper_hi = 22.0;
    for (int i = 0; i < 12; ++i) c.probes.push_back(20.0 * std::pow(10.0, i / 11.0));
    auto s = counterexample1_ratio(c);
    CHECK(last_decade_variation(s) < 0.15);
    double a = s[s.size() - 2].value, b = s.back().value;
    CHECK(std::abs(a - b) < 0.15 * std::max(a, b));
}

TEST_CASE("counterexample 1 certifies divergence only near p = 1") {
    CounterexampleOneConfig c;
    c.grid = GridSpec(1, 8192, 400.0);
    c.taper_lo = 20.0;
    c.taper_hi = 22.0;
    c.mu = 1.0 - 1.0 / 1.0 + 0.02;
    CHECK(counterexample1_divergence(c, 1.0, 12.5, 3).certified);
    c.mu = 1.0 - 1.0 / 1.3 + 0.02;
    auto conv = counterexample1_divergence(c, 1.3, 12.5, 3);
    CHECK_FALSE(conv.certified);
    CHECK(conv.growth.back() < conv.growth.front());
    CHECK_THROWS_AS(counterexample1_divergence(c, 1.0, 100.0, 3), std::invalid_argument);
}

TEST_CASE("counterexample 2 profile") {
    GridSpec g(1, 512, 16.0);
    SampledField F = counterexample2_profile(g, 0.8, OriginRule::CellAverage);
    double h = g.spacing();
    CHECK(F[g.n / 2].real() == doctest::Approx(2.0 * std::pow(h / 2, 0.8) / 0.8 / h));
    CHECK(counterexample2_profile(g, 0.8, OriginRule::Excise)[g.n / 2] == cplx(0.0));
    CHECK(F[g.n / 2 + 1].real() == doctest::Approx(std::pow(h, -0.2)));
    CHECK(F[0] == cplx(0.0));
}

TEST_CASE("counterexample 2 identity and tail") {
    CounterexampleTwoConfig c;
    for (double mu : {0.6, 0.8, 0.9}) {
        c.mu = mu;
        c.tail_grid = GridSpec(1, 4096, 100.0);
        c.fit_lo = 10;
        c.fit_hi = 50;
        CHECK(counterexample2_check(c).identity_error < 1e-6);
    }
    c = CounterexampleTwoConfig{};
    auto rep = counterexample2_check(c);
    CHECK(rep.identity_error < 1e-6);
    CHECK(std::abs(rep.tail_exponent - rep.predicted_tail) < 0.15);
    CHECK_FALSE(rep.no_power_tail);

    c.mu = 1.0;
    CHECK(counterexample2_check(c).no_power_tail);
}
