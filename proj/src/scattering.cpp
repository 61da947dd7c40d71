#include "oscint/scattering.hpp"

#include <cmath>
#include <stdexcept>

namespace oscint {

DispersionSymbol DispersionSymbol::laplacian_symbol(double c)
{
    if (!std::isfinite(c)) throw std::invalid_argument("laplacian_symbol: coefficient must be finite");
    return {laplacian_dispersion(c), c};
}

DispersionSymbol DispersionSymbol::general(Dispersion fn)
{
    if (!fn) throw std::invalid_argument("DispersionSymbol: empty function");
    return {std::move(fn), std::nullopt};
}

ResonancePhase resonance_phase(const DispersionSymbol& P, int d)
{
    if (d != 1 && d != 2) throw std::invalid_argument("resonance_phase: dimension must be 1 or 2");
    if (P.laplacian) {
        const double c = *P.laplacian;
        return {Phase::scalar(0.0, 2.0 * c, 0.0, d), c == 0.0};
    }
    Dispersion fn = P.fn;
    Phase ph = Phase::callable(d, [fn](const Point& eta, const Point& xi) { return fn(eta + xi) - fn(eta) - fn(xi); });
    // fully resonant when the phase vanishes on a spread of sample pairs
    bool zero = true;
    for (int i = -4; i <= 4 && zero; ++i)
        for (int j = -4; j <= 4 && zero; ++j) {
            Point eta{0.37 * i, d == 2 ? 0.21 * j : 0.0};
            Point xi{0.29 * j, d == 2 ? -0.43 * i : 0.0};
            if (std::abs(ph(eta, xi)) > 1e-12) zero = false;
        }
    return {ph, zero};
}

namespace {

bool trivial(const ScatterConfig& cfg)
{
    return cfg.m.is_zero() || max_abs(cfg.u0) == 0.0;
}

// partials: running integral at increasing doubling levels, the last one at the horizon
void extrapolate(ScatterResult& r, const std::vector<double>& levels, const std::vector<SampledField>& partials, const char* who)
{
    std::vector<double> lx, ly;
    for (std::size_t i = 1; i < partials.size(); ++i) {
        const double inc = lp_norm(partials[i] - partials[i - 1], 2.0);
        if (inc > 0.0) {
            lx.push_back(std::log(levels[i]));
            ly.push_back(std::log(inc));
        }
    }
    if (lx.size() < 2) throw std::runtime_error(std::string(who) + ": too few window increments to fit the tail");
    const double n = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double sigma = 1.0 - (n * sxy - sx * sy) / (n * sxx - sx * sx);
    if (!(sigma > 1.0))
        throw std::runtime_error(std::string(who) + ": non-scattering configuration, fitted tail exponent " + std::to_string(sigma) + " <= 1");
    r.exponent = sigma;
    r.truncated = partials.back();
    SampledField tail = partials.back() - partials[partials.size() - 2];
    const double g = std::exp2(1.0 - sigma);
    tail *= g / (1.0 - g);
    r.field = partials.back() + tail;
    r.tail_norm = lp_norm(tail, 2.0);
    const double total = lp_norm(r.field, 2.0);
    r.tail_fraction = total > 0.0 ? r.tail_norm / total : 0.0;
}

}

ScatterResult second_born_lambda(const ScatterConfig& cfg)
{
    const int d = cfg.u0.grid.d;
    ResonancePhase rp = resonance_phase(cfg.P, d);
    if (rp.phase.kind() == Phase::Kind::Callable)
        throw std::invalid_argument("second_born_lambda: resonance phase is not quadratic; use second_born_time");
    ScatterResult r;
    r.field = SampledField(cfg.u0.grid, Space::Physical);
    r.truncated = r.field;
    if (trivial(cfg)) return r;
    if (rp.fully_resonant) throw std::invalid_argument("second_born_lambda: fully resonant dispersion, finite part undefined");

    OscillatoryOp op{rp.phase, cfg.m, 0.0, cfg.u0.grid};
    auto B = [&](double l) {
        OscillatoryOp o = op;
        o.lambda = l;
        return apply_factored(o, cfg.u0, cfg.u0);
    };
    r.field = integrate_field(B, 0.0, 1.0, cfg.fp.quad, &r.evaluations);

    if (!(cfg.fp.lambda_max >= 8.0)) throw std::invalid_argument("second_born_lambda: lambda_max must be at least 8");
    FpBilinearResult fp = fp_bilinear_apply(rp.phase, cfg.m, cfg.u0, cfg.u0, cfg.fp, cfg.triple);
    r.evaluations += fp.evaluations;

    // running totals: int_0^1 plus i times the singular part up to each level
    std::vector<double> levels;
    std::vector<SampledField> partials;
    for (auto& [l, p] : fp.window_partials) {
        SampledField v = p;
        v *= cplx(0.0, 1.0);
        v += r.field;
        levels.push_back(l);
        partials.push_back(std::move(v));
    }
    fp.field *= cplx(0.0, 1.0);
    fp.field += r.field;
    levels.push_back(cfg.fp.lambda_max);
    partials.push_back(std::move(fp.field));
    extrapolate(r, levels, partials, "second_born_lambda");
    return r;
}

ScatterResult second_born_time(const ScatterConfig& cfg)
{
    if (!(cfg.dt > 0.0)) throw std::invalid_argument("second_born_time: dt must be positive");
    if (!(cfg.t_max >= 1.0)) throw std::invalid_argument("second_born_time: t_max must be at least 1");
    ScatterResult r;
    r.field = SampledField(cfg.u0.grid, Space::Physical);
    r.truncated = r.field;
    if (trivial(cfg)) return r;

    // steps divisible by 8 so T/8, T/4, T/2 fall on the grid
    const int steps = 8 * static_cast<int>(std::ceil(cfg.t_max / (8.0 * cfg.dt) - 1e-9));
    const double h = cfg.t_max / steps;
    const Dispersion& P = cfg.P.fn;
    auto integrand = [&](double s) {
        SampledField u1 = free_propagator(cfg.u0, s, P);
        return free_propagator(apply_pseudoproduct(cfg.m, u1, u1), -s, P);
    };

    std::vector<double> levels;
    std::vector<SampledField> partials;
    const int w = steps / 8;
    for (int k = 0; k <= steps; ++k) {
        SampledField v = integrand(k * h);
        ++r.evaluations;
        v *= 0.5 * h;
        if (k > 0) {
            r.field += v;  // right end of the trapezoid ending at k
            if (k == w || k == 2 * w || k == 4 * w || k == steps) {
                levels.push_back(k * h);
                partials.push_back(r.field);
            }
        }
        if (k < steps) r.field += v;  // left end of the next one
    }
    extrapolate(r, levels, partials, "second_born_time");
    return r;
}

}
