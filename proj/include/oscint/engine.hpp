#pragma once
#include <vector>

#include "oscint/phase.hpp"
#include "oscint/spectral.hpp"
#include "oscint/symbol.hpp"

namespace oscint {

struct OscillatoryOp {
    Phase phase;
    Symbol symbol;
    double lambda = 0.0;
    GridSpec grid;
};

// Maximum number of inner-sum terms accepted by the direct quadrature.
void set_direct_budget(double terms);
double direct_budget();

// Frequency-space routines; inputs are spectra on the same grid.
SampledField direct_hat(const Phase& phi, const Symbol& m, double lambda, const SampledField& fh, const SampledField& gh);
SampledField pseudoproduct_hat(const Symbol& m, const SampledField& fh, const SampledField& gh);

// B_lambda(f,g) by direct summation over the frequency grid (inputs in either space, output physical).
SampledField apply_direct(const OscillatoryOp& op, const SampledField& f, const SampledField& g);
// B_lambda via the quadratic-phase propagator factorization.
SampledField apply_factored(const OscillatoryOp& op, const SampledField& f, const SampledField& g);
SampledField apply_pseudoproduct(const Symbol& m, const SampledField& f, const SampledField& g);

cplx kernel(const OscillatoryOp& op, const Point& x, const Point& y, const Point& z);

struct TTStarProfile {
    double lambda = 0.0;
    std::vector<double> offsets;
    std::vector<double> values;  // |K|
    double n_fit = 0.0;
};

// TT* kernel K(xi, eta) at xi = x + u e1/2, eta = x - u e1/2.
cplx ttstar_kernel(const OscillatoryOp& op, const Point& x, double u);
TTStarProfile ttstar_kernel_decay(const OscillatoryOp& op, const Point& x, const std::vector<double>& offsets);

}
