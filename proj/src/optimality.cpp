#include "oscint/optimality.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace oscint {

namespace {

constexpr double kPi = std::numbers::pi;

void check_probe(const GridSpec& g, double r) {
    if (!(r > 0.0) || r > g.half_width - 2.0 * g.spacing())
        throw std::invalid_argument("probe radius outside the grid box (margin of two spacings required)");
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y, double* resid) {
    double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    double s = sxy / sxx;
    if (resid) {
        double ss = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double e = y[i] - (my + s * (x[i] - mx));
            ss += e * e;
        }
        *resid = std::sqrt(ss / n);
    }
    return s;
}

SampledField counterexample1_output_hat(const CounterexampleOneConfig& cfg) {
    SampledField fh = counterexample1_input_hat(cfg);
    OscillatoryOp op{Phase::scalar(1.0, cfg.k, 1.0, cfg.grid.d), Symbol::constant(1.0, cfg.grid.d), 1.0, cfg.grid};
    return forward_transform(apply_factored(op, fh, fh));
}

// (1/|cell|) * integral of |x|^{mu-d} over the origin cell
double origin_cell_average(const GridSpec& g, double mu) {
    double h = g.spacing();
    if (g.d == 1) return 2.0 * std::pow(h / 2.0, mu) / mu / h;
    const int N = 2000;
    double s = 0.0;
    for (int i = 0; i < N; ++i) {
        double th = (i + 0.5) * (kPi / 4.0) / N;
        s += std::pow(h / (2.0 * std::cos(th)), mu) / mu;
    }
    s *= 8.0 * (kPi / 4.0) / N;
    return s / (h * h);
}

}

SampledField counterexample1_input_hat(const CounterexampleOneConfig& cfg) {
    if (!(cfg.mu > 0.0)) throw std::invalid_argument("mu must be positive");
    SampledField fh = make_power_decay_hat(cfg.mu, cfg.grid);
    if (cfg.taper_hi > cfg.taper_lo) {
        for (std::size_t k = 0; k < fh.size(); ++k) {
            double r = std::sqrt(norm2(cfg.grid.point(k, Space::Frequency)));
            fh.values[k] *= 1.0 - smooth_step((r - cfg.taper_lo) / (cfg.taper_hi - cfg.taper_lo));
        }
    }
    return fh;
}

std::vector<CompensatedSample> counterexample1_ratio(const CounterexampleOneConfig& cfg) {
    if (cfg.probes.empty()) throw std::invalid_argument("no probe radii given");
    for (double r : cfg.probes) check_probe(cfg.grid, r);
    SampledField bh = counterexample1_output_hat(cfg);
    std::vector<CompensatedSample> out;
    for (double r : cfg.probes) {
        cplx v = inverse_at(bh, {r, 0.0});
        out.push_back({r, std::abs(v) * std::pow(r, 2.0 * cfg.mu)});
    }
    return out;
}

double last_decade_variation(const std::vector<CompensatedSample>& samples) {
    if (samples.empty()) throw std::invalid_argument("no samples");
    double rmax = 0.0;
    for (const auto& s : samples) rmax = std::max(rmax, s.radius);
    double lo = INFINITY, hi = 0.0;
    for (const auto& s : samples) {
        if (s.radius < rmax / 10.0 * (1.0 - 1e-12)) continue;
        lo = std::min(lo, s.value);
        hi = std::max(hi, s.value);
    }
    return hi > 0.0 ? (hi - lo) / hi : 0.0;
}

Point counterexample1_stationary_point(double k, const Point& omega) {
    if (k == -2.0) throw std::invalid_argument("degenerate cross coefficient");
    return (-1.0 / (2.0 + k)) * omega;
}

std::pair<Point, Point> counterexample1_rescaled_gradient(double k, const Point& omega, const Point& eta, const Point& xi) {
    return {omega + 2.0 * eta + k * xi, omega + 2.0 * xi + k * eta};
}

DivergenceReport counterexample1_divergence(const CounterexampleOneConfig& cfg, double p, double r0, int doublings,
                                            double min_growth) {
    if (!(p >= 1.0 && p < 2.0)) throw std::invalid_argument("divergence check needs 1 <= p < 2");
    if (doublings < 1) throw std::invalid_argument("need at least one doubling");
    if (!(r0 > 0.0) || r0 * std::pow(2.0, doublings) > cfg.grid.half_width)
        throw std::invalid_argument("nested boxes must fit inside the grid");
    DivergenceReport rep;
    rep.p = p;
    rep.r = 2.0 * p / (2.0 - p);
    SampledField b = inverse_transform(counterexample1_output_hat(cfg));
    for (int i = 0; i <= doublings; ++i) {
        double R = r0 * std::pow(2.0, i);
        SampledField part = b;
        for (std::size_t j = 0; j < part.size(); ++j) {
            Point x = cfg.grid.point(j, Space::Physical);
            if (std::abs(x[0]) > R || std::abs(x[1]) > R) part.values[j] = 0.0;
        }
        rep.half_widths.push_back(R);
        rep.norms.push_back(lp_norm(part, rep.r));
    }
    rep.certified = true;
    for (std::size_t i = 1; i < rep.norms.size(); ++i) {
        rep.growth.push_back(rep.norms[i] / rep.norms[i - 1]);
        if (rep.growth.back() < min_growth) rep.certified = false;
    }
    return rep;
}

SampledField counterexample2_profile(const GridSpec& g, double mu, OriginRule origin) {
    if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
    const double s = g.d - mu;
    const double h = g.spacing();
    return sample(g, Space::Physical, [&](const Point& x) -> cplx {
        double r = std::sqrt(norm2(x));
        if (r < 0.5 * h) {
            if (s <= 0.0) return std::pow(r, -s);
            return origin == OriginRule::Excise ? 0.0 : origin_cell_average(g, mu);
        }
        double chi = 1.0 - smooth_step((r - 0.5) / 0.5);
        return chi == 0.0 ? 0.0 : chi * std::pow(r, -s);
    });
}

CounterexampleTwoReport counterexample2_check(const CounterexampleTwoConfig& cfg) {
    if (cfg.identity_grid.d != cfg.d || cfg.tail_grid.d != cfg.d) throw std::invalid_argument("grid dimension mismatch");
    if (!(cfg.fit_hi > cfg.fit_lo && cfg.fit_lo > 0.0)) throw std::invalid_argument("invalid tail fit range");
    CounterexampleTwoReport rep;
    rep.predicted_tail = -(2.0 * cfg.mu - cfg.d);
    Phase phi = Phase::scalar(cfg.a, cfg.b, cfg.c, cfg.d);
    auto split = canonical_split(phi);
    Symbol one = Symbol::constant(1.0, cfg.d);

    auto lhs = [&](const GridSpec& g) {
        SampledField F = counterexample2_profile(g, cfg.mu, cfg.origin);
        // inputs chosen so the inner propagators of the factorization cancel
        SampledField f = free_propagator(F, split.beta), gg = free_propagator(F, split.gamma);
        return std::make_pair(F, apply_factored(OscillatoryOp{phi, one, 1.0, g}, f, gg));
    };

    {
        auto [F, B] = lhs(cfg.identity_grid);
        SampledField Fh = forward_transform(F);
        SampledField prod = inverse_transform(direct_hat(Phase::scalar(0, 0, 0, cfg.d), one, 0.0, Fh, Fh));
        SampledField rhs = free_propagator(prod, -split.alpha);
        rep.identity_error = relative_l2_error(B, rhs);
    }

    auto [F, B] = lhs(cfg.tail_grid);
    if (cfg.fit_hi > cfg.tail_grid.half_width) throw std::invalid_argument("tail fit range exceeds the grid box");
    double peak = max_abs(B);
    std::vector<double> lx, ly;
    double tail_max = 0.0;
    for (std::size_t j = 0; j < B.size(); ++j) {
        double r = std::sqrt(norm2(cfg.tail_grid.point(j, Space::Physical)));
        if (r < cfg.fit_lo || r > cfg.fit_hi) continue;
        double v = std::abs(B[j]);
        tail_max = std::max(tail_max, v);
        rep.tail_samples.emplace_back(r, v);
        if (v > 0.0) {
            lx.push_back(std::log(r));
            ly.push_back(std::log(v));
        }
    }
    rep.no_power_tail = cfg.mu >= cfg.d || tail_max < 1e-8 * peak || lx.size() < 2;
    if (lx.size() >= 2) rep.tail_exponent = fit_slope(lx, ly, &rep.tail_residual);
    return rep;
}

}
