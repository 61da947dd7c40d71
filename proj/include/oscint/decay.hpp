#pragma once
#include <optional>
#include <string>
#include <vector>

#include "oscint/engine.hpp"

namespace oscint {

struct ExponentTriple {
    double p = 1, q = 1, r = 1;  // infinity allowed
    ExponentTriple() = default;
    ExponentTriple(double p, double q, double r);
    double ip() const { return 1.0 / p; }
    double iq() const { return 1.0 / q; }
    double ir() const { return 1.0 / r; }
    std::string str() const;
};

bool admissible(const ExponentTriple& t);
double predicted_exponent(const ExponentTriple& t, int d);

struct DecayFit {
    std::vector<double> lambdas;
    std::vector<double> ratios;
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
    double fit_lambda_min = 0.0;
    double fit_lambda_max = 0.0;
    std::size_t fit_points = 0;
    std::optional<double> predicted;
    double truncation_radius = 0.0;
};

// Least squares on (log lambda, log ratio). With drop_first_octave the samples below
// twice the smallest lambda are excluded from the fit (but kept in the record).
DecayFit fit_power_law(const std::vector<double>& lambdas, const std::vector<double>& ratios, bool drop_first_octave = true);

enum class EnginePath { Direct, Factored };

// How the inputs depend on lambda during a sweep.
enum class InputFamily {
    Fixed,       // f, g unchanged
    Dispersed,   // f -> e^{i lambda beta Laplacian} f, g -> e^{i lambda gamma Laplacian} g (beta, gamma from the split)
    Translated,  // f -> f( . - lambda v)
};

struct SweepOptions {
    EnginePath path = EnginePath::Factored;
    InputFamily family = InputFamily::Fixed;
    double weight_a = 0.0;  // output weight <x>^a
    double weight_b = 0.0;  // inputs weighted by <x>^{a+b}
    Point velocity{0.0, 0.0};
    bool drop_first_octave = true;
    double truncation_radius = 0.0;  // applied to unbounded non-constant symbols
};

struct SweepInputs {
    SampledField f, g;
};
SweepInputs sweep_inputs(const Phase& phi, const SampledField& f, const SampledField& g, double lambda,
                         const SweepOptions& opt);

DecayFit lambda_sweep(const Phase& phi, const Symbol& m, const SampledField& f, const SampledField& g,
                      const ExponentTriple& t, const std::vector<double>& lambdas, const SweepOptions& opt = {});

struct ExponentRow {
    ExponentTriple triple;
    bool admissible = false;
    DecayFit fit;
    std::optional<double> predicted;
    std::optional<double> gap;  // |slope - predicted|
};

std::vector<ExponentRow> exponent_table(const Phase& phi, const Symbol& m, const SampledField& f, const SampledField& g,
                                        const std::vector<ExponentTriple>& triples, const std::vector<double>& lambdas,
                                        const SweepOptions& opt = {});

}
