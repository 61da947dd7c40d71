#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oscint/spectral.hpp"

using namespace oscint;
using std::numbers::pi;

namespace {

double rel_max_diff(const SampledField& a, const SampledField& b) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::abs(b[i]));
    }
    return num / den;
}

SampledField random_field(const GridSpec& g, std::uint64_t seed, Space s) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    SampledField f(g, s);
    for (auto& v : f.values) v = cplx(nd(rng), nd(rng));
    return f;
}

}

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(GridSpec(1, 6, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec(1, 4, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec(3, 16, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec(1, 16, 0.0), std::invalid_argument);
    GridSpec g(1, 16, 2.0);
    CHECK(g.spacing() == doctest::Approx(0.25));
    CHECK(g.freq_spacing() == doctest::Approx(pi / 2));
    CHECK(g.xi(0) == doctest::Approx(-g.freq_extent()));
    CHECK_THROWS_AS(SampledField(g, Space::Physical, std::vector<cplx>(15)), std::invalid_argument);
}

TEST_CASE("forward transform of zero and Gaussian") {
    GridSpec g(1, 512, 16.0);
    SampledField z(g, Space::Physical);
    CHECK(max_abs(forward_transform(z)) == 0.0);

    SampledField f = gaussian(g, 1.0);
    SampledField F = forward_transform(f);
    double err = 0.0;
    for (std::size_t k = 0; k < F.size(); ++k) {
        double xi = g.xi(k);
        err = std::max(err, std::abs(F[k] - std::exp(-xi * xi / 2)));
    }
    CHECK(err < 1e-8);
    CHECK_THROWS_AS(forward_transform(F), std::invalid_argument);
    CHECK_THROWS_AS(inverse_transform(f), std::invalid_argument);
}

TEST_CASE("two dimensional Gaussian transform") {
    GridSpec g(2, 64, 10.0);
    SampledField F = forward_transform(gaussian(g, 1.0));
    double err = 0.0;
    for (std::size_t k = 0; k < F.size(); ++k) {
        Point xi = g.point(k, Space::Frequency);
        err = std::max(err, std::abs(F[k] - std::exp(-norm2(xi) / 2)));
    }
    CHECK(err < 1e-8);
}

TEST_CASE("Parseval and roundtrip") {
    for (int d : {1, 2}) {
        GridSpec g(d, d == 1 ? 256 : 32, 5.0);
        SampledField f = random_field(g, 7 + d, Space::Physical);
        SampledField F = forward_transform(f);
        CHECK(std::abs(lp_norm(F, 2) - lp_norm(f, 2)) <= 1e-12 * lp_norm(f, 2));
        CHECK(rel_max_diff(inverse_transform(F), f) < 1e-12);
        SampledField G = random_field(g, 11 + d, Space::Frequency);
        CHECK(rel_max_diff(forward_transform(inverse_transform(G)), G) < 1e-12);
        SampledField zero(g, Space::Frequency);
        CHECK(max_abs(inverse_transform(zero)) == 0.0);
    }
}

TEST_CASE("Lebesgue norms") {
    GridSpec unit(1, 1024, 1.0);
    SampledField one = sample(unit, Space::Physical, [](const Point&) { return cplx(1.0); });
    CHECK(lp_norm(one, 2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    GridSpec g(1, 4096, 12.0);
    SampledField f = sample(g, Space::Physical, [](const Point& x) { return cplx(std::exp(-x[0] * x[0])); });
    CHECK(lp_norm(f, INFINITY) == doctest::Approx(1.0));
    CHECK(std::abs(lp_norm(f, 1) - std::sqrt(pi)) < 1e-6);
    CHECK(weighted_lp_norm(f, 1, 0.0) == lp_norm(f, 1));
    CHECK_THROWS_AS(lp_norm(f, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(weighted_lp_norm(f, 1, -1.0), std::invalid_argument);
    SampledField z(g, Space::Physical);
    CHECK(weighted_lp_norm(z, 2, 1.5) == 0.0);

    // midpoint sampling of the indicator of [0,1)
    GridSpec fine(1, 1 << 16, 2.0);
    SampledField ind = sample(fine, Space::Physical, [](const Point&) { return cplx(0.0); });
    double h = fine.spacing();
    for (std::size_t j = 0; j < ind.size(); ++j) {
        double x = fine.x(j);
        if (x >= 0.0 && x < 1.0) ind[j] = 1.0;
    }
    double exact = (std::sqrt(2.0) + std::log(1.0 + std::sqrt(2.0))) / 2.0;
    // left Riemann sum error is about h * (<1> - <0>)/2
    CHECK(std::abs(weighted_lp_norm(ind, 1, 1.0) - exact) < 1e-4 + h);
}

TEST_CASE("free propagator") {
    GridSpec g(1, 2048, 400.0);
    SampledField f = gaussian(g, 1.0);
    CHECK(rel_max_diff(free_propagator(f, 0.0), f) == 0.0);
    for (double t : {0.5, 2.0, 10.0}) {
        SampledField u = free_propagator(f, t);
        CHECK(std::abs(lp_norm(u, INFINITY) - std::pow(1 + 4 * t * t, -0.25)) < 1e-6);
        CHECK(std::abs(lp_norm(u, 2) - lp_norm(f, 2)) <= 1e-12 * lp_norm(f, 2));
    }
    SampledField a = free_propagator(free_propagator(f, 1.3), 2.1);
    SampledField b = free_propagator(f, 3.4);
    CHECK(relative_l2_error(a, b) < 1e-10);
}

TEST_CASE("dispersive decay slope over t in [2,64]") {
    GridSpec g(1, 2048, 400.0);
    SampledField f = gaussian(g, 1.0);
    std::vector<double> lt, ln;
    for (double t = 2.0; t <= 64.0; t *= std::sqrt(2.0)) {
        lt.push_back(std::log(t));
        ln.push_back(std::log(lp_norm(free_propagator(f, t), INFINITY)));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lt.size(); ++i) {
        mx += lt[i];
        my += ln[i];
    }
    mx /= lt.size();
    my /= lt.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lt.size(); ++i) {
        sxy += (lt[i] - mx) * (ln[i] - my);
        sxx += (lt[i] - mx) * (lt[i] - mx);
    }
    CHECK(std::abs(sxy / sxx + 0.5) < 0.05);
}

TEST_CASE("power decay spectrum") {
    GridSpec g(1, 256, 20.0);
    SampledField h = make_power_decay_hat(0.6, g);
    CHECK(h.space == Space::Frequency);
    CHECK(h[g.n / 2] == cplx(1.0));
    for (std::size_t k = 1; k < g.n; ++k) {
        CHECK(h[k].imag() == 0.0);
        CHECK(h[k].real() > 0.0);
        CHECK(h[k] == h[g.n - k]);
    }
    CHECK_THROWS_AS(make_power_decay_hat(0.0, g), std::invalid_argument);

    // mu = d - d/p + eps with p = 1.5: L^p norm settles under refinement
    double p = 1.5, mu = 1.0 - 1.0 / p + 0.2;
    std::vector<double> norms;
    for (std::size_t n : {4096u, 8192u, 16384u, 32768u}) {
        GridSpec gr(1, n, 40.0);
        norms.push_back(lp_norm(inverse_transform(make_power_decay_hat(mu, gr)), p));
    }
    double d1 = std::abs(norms[1] - norms[0]), d2 = std::abs(norms[2] - norms[1]), d3 = std::abs(norms[3] - norms[2]);
    CHECK(d2 < d1);
    CHECK(d3 < d2);
    CHECK(d3 < 0.05 * norms[3]);
}

TEST_CASE("translation") {
    GridSpec g(1, 512, 20.0);
    SampledField f = gaussian(g, 1.0);
    SampledField shifted = translate(f, {3.0, 0.0});
    SampledField expect = gaussian(g, 1.0, {3.0, 0.0});
    CHECK(relative_l2_error(shifted, expect) < 1e-10);
}
