#pragma once
#include <optional>

#include "oscint/finite_part.hpp"

namespace oscint {

// P(D) for du/dt + i P(D) u = T_m(u,u); free evolution u(t) = e^{-itP(D)} u0
struct DispersionSymbol {
    Dispersion fn;
    std::optional<double> laplacian;  // set when P = c |xi|^2

    static DispersionSymbol laplacian_symbol(double c = 1.0);
    static DispersionSymbol general(Dispersion fn);
    double operator()(const Point& xi) const { return fn(xi); }
};

struct ResonancePhase {
    Phase phase;
    bool fully_resonant = false;
};

// phi(eta, xi) = P(xi + eta) - P(eta) - P(xi)
ResonancePhase resonance_phase(const DispersionSymbol& P, int d);

struct ScatterConfig {
    DispersionSymbol P = DispersionSymbol::laplacian_symbol(1.0);
    Symbol m = Symbol::constant(1.0, 2);
    SampledField u0;
    double t_max = 8.0;
    double dt = 0.05;
    FinitePartConfig fp{{}, 8.0, std::nullopt, {16, 1e-8, 24}};
    ExponentTriple triple{1.0, 1.0, INFINITY};
};

struct ScatterResult {
    SampledField field;      // truncated integral plus extrapolated tail
    SampledField truncated;  // integral up to the horizon
    double tail_norm = 0.0;      // L2 norm of the tail correction
    double tail_fraction = 0.0;  // tail_norm / ||field||_2
    double exponent = 0.0;       // fitted: increments over doubling windows shrink like T^{1-exponent}
    std::size_t evaluations = 0;
};

// Both routines extrapolate past the horizon the same way: the increments over the windows
// [H/8,H/4], [H/4,H/2], [H/2,H] are fitted to H^{1-sigma} and the geometric remainder is added.
// sigma <= 1 is reported as a non-scattering configuration.

// L2(u0) as the lambda integral of B_lambda(u0,u0) for the resonance phase, split at lambda = 1,
// with the singular part from fp_bilinear_apply.
ScatterResult second_born_lambda(const ScatterConfig& cfg);
// Same limit from the Duhamel integral in profile form, trapezoidal in s.
ScatterResult second_born_time(const ScatterConfig& cfg);

}
