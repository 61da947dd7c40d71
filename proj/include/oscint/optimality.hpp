#pragma once
#include <utility>
#include <vector>

#include "oscint/decay.hpp"

namespace oscint {

struct CounterexampleOneConfig {
    double mu = 0.6;
    double k = 8.0;  // cross coefficient of eta^2 + xi^2 + k eta.xi
    GridSpec grid{1, 2048, 120.0};
    std::vector<double> probes;  // |x| along the first axis
    // f^ is multiplied by 1 - smooth_step((|xi| - taper_lo)/(taper_hi - taper_lo)) when taper_hi > taper_lo
    double taper_lo = 0.0;
    double taper_hi = 0.0;
};

struct CompensatedSample {
    double radius;
    double value;  // |B_1(f,f)(x)| |x|^{2 mu}
};

SampledField counterexample1_input_hat(const CounterexampleOneConfig& cfg);
std::vector<CompensatedSample> counterexample1_ratio(const CounterexampleOneConfig& cfg);
// relative variation (max - min)/max of the compensated ratio over probes in [r_max/10, r_max]
double last_decade_variation(const std::vector<CompensatedSample>& samples);

// Stationary point of psi(eta,xi) = omega.(eta+xi) + |eta|^2 + |xi|^2 + k eta.xi and the gradient there.
Point counterexample1_stationary_point(double k, const Point& omega);
std::pair<Point, Point> counterexample1_rescaled_gradient(double k, const Point& omega, const Point& eta, const Point& xi);

struct DivergenceReport {
    double p = 1.0, r = 2.0;
    std::vector<double> half_widths;
    std::vector<double> norms;
    std::vector<double> growth;  // norm[i+1]/norm[i]
    bool certified = false;
};
// ||B_1(f,f)||_r for r = 2p/(2-p) restricted to boxes [-R,R]^d with R doubling from r0,
// all inside one grid that holds the whole output; certified when every doubling grows
// the norm by at least min_growth.
DivergenceReport counterexample1_divergence(const CounterexampleOneConfig& cfg, double p, double r0, int doublings = 3,
                                            double min_growth = 1.25);

enum class OriginRule { CellAverage, Excise };

struct CounterexampleTwoConfig {
    double mu = 0.8;
    int d = 1;
    GridSpec identity_grid{1, 512, 16.0};
    GridSpec tail_grid{1, 65536, 460.0};
    double fit_lo = 60.0, fit_hi = 300.0;
    OriginRule origin = OriginRule::CellAverage;
    // phase a|eta|^2 + b eta.xi + c|xi|^2 = 8|xi|^2 + |eta|^2 + |xi+eta|^2
    double a = 2.0, b = 2.0, c = 9.0;
};

struct CounterexampleTwoReport {
    double identity_error = 0.0;
    double tail_exponent = 0.0;
    double tail_residual = 0.0;
    double predicted_tail = 0.0;
    bool no_power_tail = false;
    std::vector<std::pair<double, double>> tail_samples;  // (|x|, |B|) used in the fit
};

// chi(x)/|x|^{d - mu} with chi = 1 on |x| <= 1/2, 0 for |x| >= 1
SampledField counterexample2_profile(const GridSpec& g, double mu, OriginRule origin);
CounterexampleTwoReport counterexample2_check(const CounterexampleTwoConfig& cfg);

}
