#pragma once
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "oscint/decay.hpp"

namespace oscint {

// Gauss-Legendre nodes and weights on [-1,1]
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int order);

struct LambdaQuadrature {
    int order = 16;
    double rel_tol = 1e-8;
    int max_depth = 24;
};

using ScalarPhase = std::function<double(const Point&)>;

// <D_T, f> = -i int_0^T int e^{i lambda phi(x)} f(x) dx d lambda, grid quadrature in x and
// composite Gauss-Legendre in lambda on panels [0,1], [2^k, 2^{k+1}].
cplx dt_pairing(const ScalarPhase& phi, const SampledField& f, double T, const LambdaQuadrature& q = {});
// Same quantity at every T of an increasing schedule, sharing the lambda panels.
std::vector<cplx> dt_pairing_schedule(const ScalarPhase& phi, const SampledField& f, const std::vector<double>& T_list,
                                      const LambdaQuadrature& q = {});

struct FpExtrapolation {
    std::vector<double> T;
    std::vector<cplx> values;
    std::vector<double> decrements;  // |D_{T_{i+1}} - D_{T_i}|
    std::optional<double> delta;     // from decrements ~ T^{1-delta}
    double decrement_residual = 0.0;
    bool at_roundoff = false;        // decrements vanished; the last value is the limit
    cplx extrapolated{0.0, 0.0};
};
FpExtrapolation dt_extrapolate(const ScalarPhase& phi, const SampledField& f, const std::vector<double>& T_list,
                               const LambdaQuadrature& q = {});

// p.v.(1/phi) - i pi sum over roots f(x0)/|phi'(x0)|, one-dimensional, on [a,b]
cplx fp_reference_pairing(const std::function<double(double)>& phi, const std::function<cplx(double)>& f, double a, double b,
                          const std::function<double(double)>& dphi = {});
// f sampled on a d = 1 grid, interpolated locally (degree 7 Lagrange)
cplx fp_reference_pairing(const std::function<double(double)>& phi, const SampledField& f,
                          const std::function<double(double)>& dphi = {});

struct FinitePartConfig {
    std::vector<double> T_list;
    double lambda_max = 8.0;
    std::optional<double> rho;  // decay exponent of ||B_lambda||; defaults to the triple's value
    LambdaQuadrature quad{8, 1e-8, 24};
};

struct FpBilinearResult {
    SampledField field;
    double rho = 0.0;
    double c_emp = 0.0;
    double tail_estimate = 0.0;
    std::size_t evaluations = 0;
    // the same integral stopped at lambda_max/8, /4, /2 (levels below 1 omitted)
    std::vector<std::pair<double, SampledField>> window_partials;
};

// integral of a field-valued function over [a,b] by adaptive Gauss-Legendre on geometric panels;
// partials, when given, receives the integral over [a,c] for each checkpoint c in (a,b)
SampledField integrate_field(const std::function<SampledField(double)>& F, double a, double b, const LambdaQuadrature& q,
                             std::size_t* evaluations = nullptr,
                             const std::function<void(double, const SampledField&)>& observe = {},
                             const std::vector<double>& checkpoints = {}, std::vector<SampledField>* partials = nullptr);

double fp_decay_exponent(const ExponentTriple& t, int d);

// -i int_1^{Lambda_max} B_lambda(f,g) d lambda with tail estimate C Lambda^{1-rho}/(rho-1)
FpBilinearResult fp_bilinear_apply(const Phase& phi, const Symbol& m, const SampledField& f, const SampledField& g,
                                   const FinitePartConfig& cfg, const ExponentTriple& t);

}
