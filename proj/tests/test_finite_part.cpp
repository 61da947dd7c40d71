#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oscint/finite_part.hpp"

using namespace oscint;

namespace {
const double kPi = std::numbers::pi;
ScalarPhase linear(double c = 0.0) {
    return [c](const Point& p) { return p[0] - c; };
}
SampledField sampled(const GridSpec& g, std::function<double(double)> fn) {
    return sample(g, Space::Physical, [fn](const Point& p) { return cplx(fn(p[0])); });
}
}

TEST_CASE("gauss-legendre integrates polynomials exactly") {
    for (int n : {1, 2, 5, 16, 33}) {
        auto [x, w] = gauss_legendre(n);
        for (int deg = 0; deg <= 2 * n - 1; ++deg) {
            double s = 0;
            for (int i = 0; i < n; ++i) s += w[i] * std::pow(x[i], deg);
            const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
            CHECK(s == doctest::Approx(exact).epsilon(1e-13).scale(1.0));
        }
    }
    CHECK_THROWS_AS(gauss_legendre(0), std::invalid_argument);
}

TEST_CASE("truncated pairing at T=0 and small T") {
    GridSpec g(1, 1024, 6);
    auto f = sampled(g, [](double x) { return std::exp(-x * x); });
    CHECK(std::abs(dt_pairing(linear(), f, 0.0)) == 0.0);
    CHECK_THROWS_AS(dt_pairing(linear(), f, -1.0), std::invalid_argument);

    // cross-check against the closed form -(e^{iT phi} - 1)/phi on a phase without zeros
    ScalarPhase shifted = [](const Point& p) { return p[0] + 10.0; };
    const double T = 3.7;
    cplx direct{0, 0};
    for (std::size_t j = 0; j < g.n; ++j) {
        const double ph = g.x(j) + 10.0;
        direct += -(std::polar(1.0, T * ph) - 1.0) / ph * f.values[j] * g.spacing();
    }
    CHECK(std::abs(dt_pairing(shifted, f, T) - direct) < 1e-10);
}

TEST_CASE("finite part of 1/x against closed forms") {
    GridSpec g(1, 2048, 6);
    auto gauss = sampled(g, [](double x) { return std::exp(-x * x); });
    auto odd = sampled(g, [](double x) { return x * std::exp(-x * x); });
    std::vector<double> Ts{125, 250, 500, 1000};

    auto e1 = dt_extrapolate(linear(), gauss, Ts);
    CHECK(std::abs(e1.extrapolated - cplx(0, -kPi)) < 1e-2);
    auto e2 = dt_extrapolate(linear(), odd, Ts);
    CHECK(std::abs(e2.extrapolated - std::sqrt(kPi)) < 1e-3);

    auto r1 = fp_reference_pairing([](double x) { return x; }, gauss);
    auto r2 = fp_reference_pairing([](double x) { return x; }, odd);
    CHECK(std::abs(r1 - cplx(0, -kPi)) < 1e-6);
    CHECK(std::abs(r2 - std::sqrt(kPi)) < 1e-6);
    CHECK(std::abs(r1 - e1.extrapolated) < 1e-2);
    CHECK(std::abs(r2 - e2.extrapolated) < 1e-2);
}

TEST_CASE("shifted root: reference pairing and truncation limit agree") {
    GridSpec g(1, 2048, 6);
    auto gauss = sampled(g, [](double x) { return std::exp(-x * x); });
    for (double c : {0.3, -1.1}) {
        auto e = dt_extrapolate(linear(c), gauss, {125, 250, 500, 1000});
        auto r = fp_reference_pairing([c](double x) { return x - c; }, gauss, [](double) { return 1.0; });
        CHECK(r.imag() == doctest::Approx(-kPi * std::exp(-c * c)).epsilon(1e-8));
        CHECK(std::abs(r - e.extrapolated) < 1e-2);
    }
    // nonlinear monotone phase; T limited by what the x-grid resolves
    auto cubic = [](double x) { return x + x * x * x / 3.0 - 0.5; };
    auto r = fp_reference_pairing(cubic, gauss);
    ScalarPhase cubic_pt = [&](const Point& p) { return cubic(p[0]); };
    auto e = dt_extrapolate(cubic_pt, gauss, {4, 8, 16, 32});
    CHECK(std::abs(r - e.extrapolated) < 1e-2);
    CHECK_THROWS_AS(dt_pairing(cubic_pt, gauss, 1000.0), std::invalid_argument);
}

TEST_CASE("reference pairing errors") {
    auto f = [](double x) { return cplx(std::exp(-x * x)); };
    CHECK_THROWS_AS(fp_reference_pairing([](double x) { return x * x * x; }, f, -3, 3), std::runtime_error);
    CHECK_THROWS_AS(fp_reference_pairing([](double x) { return x; }, f, 1, -1), std::invalid_argument);
}

TEST_CASE("Cauchy decrements decay faster than 1/T^0") {
    GridSpec g(1, 8192, 16);
    auto f = sampled(g, [](double x) { return std::exp(-std::abs(x)); });
    auto e = dt_extrapolate(linear(), f, {8, 16, 32, 64, 128});
    REQUIRE(e.delta.has_value());
    CHECK(*e.delta > 1.0);
    CHECK(*e.delta == doctest::Approx(2.0).epsilon(0.05));
    CHECK_FALSE(e.at_roundoff);
    // the exact limit is -i pi f(0) since p.v. vanishes for even f
    CHECK(std::abs(e.extrapolated - cplx(0, -kPi)) < std::abs(e.values.back() - cplx(0, -kPi)));
}

TEST_CASE("singular bilinear multiplier") {
    ExponentTriple t(1, 1, INFINITY);
    GridSpec g1(1, 128, 10);
    auto a1 = gaussian(g1, 1.0);
    FinitePartConfig cfg;
    cfg.lambda_max = 4;
    try {
        fp_bilinear_apply(Phase::scalar(0, 1, 0, 1), Symbol::constant(1.0, 1), a1, a1, cfg, t);
        FAIL("d=1 accepted");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("dimension 1") != std::string::npos);
    }

    GridSpec g(2, 32, 14);
    auto f = gaussian(g, 1.0);
    auto h = gaussian(g, 1.0, {0.5, -0.3});
    auto phi = Phase::scalar(0, 1, 0, 2);
    CHECK_THROWS_AS(fp_bilinear_apply(Phase::callable(2, [](const Point& e, const Point& x) { return dot(e, x); }), Symbol::constant(1.0, 2),
                                      f, f, cfg, t),
                    std::invalid_argument);
    CHECK_THROWS_AS(fp_bilinear_apply(phi, Symbol::constant(1.0, 2), f, f, cfg, ExponentTriple(2, 2, 2)), std::invalid_argument);

    auto zero = fp_bilinear_apply(phi, Symbol::constant(0.0, 2), f, h, cfg, t);
    CHECK(max_abs(zero.field) == 0.0);

    auto base = fp_bilinear_apply(phi, Symbol::constant(1.0, 2), f, h, cfg, t);
    CHECK(base.rho == 2.0);
    CHECK(base.tail_estimate > 0.0);

    SampledField f2 = f;
    f2 *= cplx(0.3, -1.2);
    f2 += h;
    auto lin = fp_bilinear_apply(phi, Symbol::constant(1.0, 2), f2, h, cfg, t);
    auto part = fp_bilinear_apply(phi, Symbol::constant(1.0, 2), h, h, cfg, t);
    SampledField expect = base.field;
    expect *= cplx(0.3, -1.2);
    expect += part.field;
    CHECK(relative_l2_error(lin.field, expect) < 1e-10);

    FinitePartConfig cfg2 = cfg;
    cfg2.lambda_max = 8;
    auto longer = fp_bilinear_apply(phi, Symbol::constant(1.0, 2), f, h, cfg2, t);
    CHECK(lp_norm(longer.field - base.field, INFINITY) < 2.0 * base.tail_estimate);
}
