#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oscint/engine.hpp"

using namespace oscint;
using std::numbers::pi;

namespace {

cplx inner(const SampledField& a, const SampledField& b) {
    cplx s(0.0);
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * std::conj(b[i]);
    return s * a.grid.cell(a.space);
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= x.size();
    my /= y.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

}

TEST_CASE("lambda = 0 product identity on band-limited fields") {
    for (int d : {1, 2}) {
        GridSpec g(d, d == 1 ? 128 : 32, 6.0);
        SampledField f = random_bandlimited(g, 1), h = random_bandlimited(g, 2);
        SampledField expect(g, Space::Physical);
        for (std::size_t j = 0; j < g.size(); ++j) expect[j] = std::pow(2 * pi, 0.5 * d) * f[j] * h[j];
        OscillatoryOp op{Phase::scalar(1, 1, 1, d), Symbol::constant(1.0, d), 0.0, g};
        CHECK(relative_l2_error(apply_direct(op, f, h), expect) < 1e-10);
        CHECK(relative_l2_error(apply_factored(op, f, h), expect) < 1e-10);
        CHECK(relative_l2_error(apply_pseudoproduct(Symbol::constant(1.0, d), f, h), expect) < 1e-10);
    }
}

TEST_CASE("zero symbol and validation") {
    GridSpec g(1, 64, 8.0);
    SampledField f = gaussian(g), h = gaussian(g, 0.5);
    OscillatoryOp op{Phase::scalar(1, 4, 1), Symbol::constant(0.0), 3.0, g};
    CHECK(max_abs(apply_direct(op, f, h)) == 0.0);
    CHECK(max_abs(apply_factored(op, f, h)) == 0.0);

    GridSpec other(1, 128, 8.0);
    OscillatoryOp bad{Phase::scalar(1, 4, 1), Symbol::constant(1.0), 1.0, other};
    CHECK_THROWS_AS(apply_direct(bad, f, h), std::invalid_argument);
    Eigen::MatrixXd I = Eigen::MatrixXd::Identity(1, 1);
    OscillatoryOp quad{Phase::quadratic(I, I, I), Symbol::constant(1.0), 1.0, g};
    CHECK_THROWS_AS(apply_factored(quad, f, h), std::invalid_argument);

    double old = direct_budget();
    set_direct_budget(100.0);
    OscillatoryOp big{Phase::scalar(1, 4, 1), Symbol::constant(1.0), 1.0, g};
    CHECK_THROWS_AS(apply_direct(big, f, h), std::runtime_error);
    set_direct_budget(old);
}

TEST_CASE("direct and factored paths agree") {
    GridSpec g(1, 128, 8.0);
    SampledField f = gaussian(g, 1.0, {0.5, 0}), h = gaussian(g, 0.8, {-0.3, 0});
    std::vector<Phase> phases{Phase::scalar(1, 4, 1), Phase::scalar(1, 1, 1), Phase::scalar(-0.5, 0.3, 2.0)};
    std::vector<Symbol> symbols{Symbol::constant(1.0), Symbol::bump({0.2, 0}, {-0.1, 0}, 2.5)};
    for (const auto& phi : phases)
        for (const auto& m : symbols)
            for (double lam : {1.0, 4.0, 16.0}) {
                OscillatoryOp op{phi, m, lam, g};
                CHECK(relative_l2_error(apply_factored(op, f, h), apply_direct(op, f, h)) < 1e-6);
            }
}

TEST_CASE("factored path against composed primitives") {
    GridSpec g(1, 128, 8.0);
    SampledField f = gaussian(g), h = gaussian(g, 0.7, {1.0, 0});
    for (double lam : {0.5, 3.0}) {
        OscillatoryOp op{Phase::scalar(1, 0, 0), Symbol::constant(1.0), lam, g};
        SampledField pf = free_propagator(f, -lam);
        SampledField expect(g, Space::Physical);
        for (std::size_t j = 0; j < g.size(); ++j) expect[j] = std::sqrt(2 * pi) * pf[j] * h[j];
        CHECK(relative_l2_error(apply_factored(op, f, h), expect) < 1e-10);
    }
}

TEST_CASE("bilinearity, symmetry, continuity") {
    GridSpec g(1, 128, 8.0);
    SampledField f1 = gaussian(g), f2 = gaussian(g, 0.6, {1, 0}), h = gaussian(g, 1.2, {-1, 0});
    Symbol bump = Symbol::bump({0, 0}, {0, 0}, 3.0);
    cplx a(0.3, -1.2);
    SampledField lhs = apply_pseudoproduct(bump, a * f1 + f2, h);
    SampledField rhs = a * apply_pseudoproduct(bump, f1, h) + apply_pseudoproduct(bump, f2, h);
    CHECK(relative_l2_error(lhs, rhs) < 1e-12);

    OscillatoryOp sym{Phase::scalar(0.7, 1.3, 0.7), bump, 5.0, g};
    CHECK(relative_l2_error(apply_direct(sym, f1, h), apply_direct(sym, h, f1)) < 1e-13);

    OscillatoryOp base{Phase::scalar(1, 4, 1), bump, 2.0, g};
    SampledField b0 = apply_factored(base, f1, h);
    double prev = INFINITY;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
        OscillatoryOp near = base;
        near.lambda += eps;
        double diff = relative_l2_error(apply_factored(near, f1, h), b0);
        CHECK(diff < prev);
        prev = diff;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("adjoint duality") {
    GridSpec g(1, 128, 10.0);
    SampledField f = gaussian(g, 1.0, {0.5, 0}), h = gaussian(g, 0.9), w = gaussian(g, 1.1, {-0.4, 0});
    Phase phi = Phase::scalar(0.6, 1.7, -0.8);
    Symbol m = Symbol::bump({0.2, 0}, {-0.3, 0}, 2.0);
    double lam = 3.0;
    auto [phi1, phi2] = adjoint_phases(phi);
    // <B(f,h), w> = <f, B'(w, conj h)> with phase -phi*1(eta,-xi) and symbol conj m*1(eta,-xi)
    Phase dual_phase = Phase::callable(1, [phi1](const Point& e, const Point& x) { return -phi1(e, -1.0 * x); });
    Symbol dual_symbol = Symbol::coifman_meyer(1, [m](const Point& e, const Point& x) { return std::conj(m(e + x, -1.0 * x)); });
    SampledField hc = h;
    for (auto& v : hc.values) v = std::conj(v);
    OscillatoryOp op{phi, m, lam, g}, dual{dual_phase, dual_symbol, lam, g};
    cplx left = inner(apply_direct(op, f, h), w);
    cplx right = inner(f, apply_direct(dual, w, hc));
    CHECK(std::abs(left - right) < 1e-8 * std::abs(left));
}

TEST_CASE("x-dependent symbols") {
    GridSpec g(1, 32, 4.0);
    SampledField f = gaussian(g), h = gaussian(g, 0.8);
    Symbol xs = Symbol::x_dependent(1, [](const Point& x, const Point&, const Point&) { return cplx(1.0 + 0.0 * x[0]); });
    OscillatoryOp op{Phase::scalar(1, 1, 1), xs, 1.5, g}, ref{Phase::scalar(1, 1, 1), Symbol::constant(1.0), 1.5, g};
    CHECK(relative_l2_error(apply_direct(op, f, h), apply_direct(ref, f, h)) < 1e-12);

    // a symbol of the form a(x) m(eta,xi) multiplies the output by a(x)
    Symbol xm = Symbol::x_dependent(1, [](const Point& x, const Point&, const Point&) { return cplx(std::cos(x[0])); });
    SampledField out = apply_direct(OscillatoryOp{Phase::scalar(1, 1, 1), xm, 1.5, g}, f, h);
    SampledField base = apply_direct(ref, f, h);
    for (std::size_t j = 0; j < g.size(); ++j) CHECK(std::abs(out[j] - std::cos(g.x(j)) * base[j]) < 1e-12);
}

TEST_CASE("Hoelder constant stable under refinement") {
    Symbol m = Symbol::bump({0, 0}, {0, 0}, 2.0);
    std::vector<double> consts;
    for (std::size_t n : {256u, 512u}) {
        GridSpec g(1, n, 16.0 * n / 256.0);
        SampledField f = gaussian(g, 1.0), h = gaussian(g, 2.0, {1, 0});
        consts.push_back(lp_norm(apply_pseudoproduct(m, f, h), 1) / (lp_norm(f, 2) * lp_norm(h, 2)));
    }
    CHECK(std::abs(consts[1] - consts[0]) < 0.02 * consts[0]);
}

TEST_CASE("kernel") {
    GridSpec g(1, 2048, 2000.0);
    OscillatoryOp zero{Phase::scalar(1, 1, 1), Symbol::constant(0.0), 8.0, g};
    CHECK(kernel(zero, {0, 0}, {0, 0}, {0, 0}) == cplx(0.0));
    OscillatoryOp unbounded{Phase::scalar(1, 1, 1), Symbol::constant(1.0), 8.0, g};
    CHECK_THROWS_AS(kernel(unbounded, {0, 0}, {0, 0}, {0, 0}), std::invalid_argument);

    Symbol bump = Symbol::bump({0, 0}, {0, 0}, 1.0);
    OscillatoryOp op{Phase::scalar(1, 1, 1), bump, 8.0, g};
    cplx k1 = kernel(op, {0.3, 0}, {-0.2, 0}, {0.5, 0});
    cplx k2 = kernel(op, {1.3, 0}, {0.8, 0}, {1.5, 0});
    CHECK(std::abs(k1 - k2) < 1e-10 * std::abs(k1));

    std::vector<double> ll, lk;
    for (double lam = 8.0; lam <= 512.0; lam *= 2.0) {
        op.lambda = lam;
        ll.push_back(std::log(lam));
        lk.push_back(std::log(std::abs(kernel(op, {0, 0}, {0, 0}, {0, 0}))));
    }
    CHECK(slope(ll, lk) <= -0.9);
}

TEST_CASE("TT* kernel decay") {
    GridSpec g(1, 256, 50.0);
    OscillatoryOp op{Phase::scalar(0, 1, 0), Symbol::bump({0, 0}, {0, 0}, 1.0), 64.0, g};
    CHECK(std::abs(ttstar_kernel(op, {0, 0}, 0.0)) > 0.0);
    CHECK(std::abs(ttstar_kernel(op, {0, 0}, 0.0).imag()) < 1e-14);
    std::vector<double> offsets;
    for (double s = 0.5; s <= 12.0; s *= 1.25) offsets.push_back(s / 64.0);
    TTStarProfile prof = ttstar_kernel_decay(op, {0, 0}, offsets);
    CHECK(prof.n_fit >= 2.0);

    for (double s : {1.0, 2.0, 4.0}) {
        double u = s / 64.0;
        cplx a = ttstar_kernel(op, {0, 0}, u);
        OscillatoryOp op2 = op;
        op2.lambda = 128.0;
        cplx b = ttstar_kernel(op2, {0, 0}, u / 2);
        CHECK(std::abs(std::abs(a) - std::abs(b)) < 0.2 * std::abs(a));
    }
}
