#include "oscint/decay.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace oscint {

namespace {

std::string fmt_exp(double v) {
    if (std::isinf(v)) return "inf";
    std::ostringstream os;
    os << v;
    return os.str();
}

void check_lambdas(const std::vector<double>& lambdas) {
    if (lambdas.size() < 4) throw std::invalid_argument("lambda list needs at least 4 points");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!(lambdas[i] > 0.0)) throw std::invalid_argument("lambda values must be positive");
        if (i > 0 && !(lambdas[i] > lambdas[i - 1])) throw std::invalid_argument("lambda list must be increasing");
    }
    double q = lambdas[1] / lambdas[0];
    for (std::size_t i = 2; i < lambdas.size(); ++i)
        if (std::abs(lambdas[i] / lambdas[i - 1] - q) > 1e-6 * q) throw std::invalid_argument("lambda list must be geometric");
}

Symbol prepare_symbol(const Symbol& m, const SweepOptions& opt, double& radius_used) {
    radius_used = 0.0;
    if (opt.truncation_radius > 0.0 && !m.bounded() && m.kind() != Symbol::Kind::Constant) {
        radius_used = opt.truncation_radius;
        return truncate_symbol(m, opt.truncation_radius);
    }
    return m;
}

SampledField evaluate(const Phase& phi, const Symbol& m, double lambda, const SampledField& f, const SampledField& g,
                      EnginePath path) {
    OscillatoryOp op{phi, m, lambda, f.grid};
    return path == EnginePath::Direct ? apply_direct(op, f, g) : apply_factored(op, f, g);
}

double ratio_for(const SampledField& out, const SweepInputs& in, const ExponentTriple& t, const SweepOptions& opt) {
    double a = opt.weight_a, ab = opt.weight_a + opt.weight_b;
    double den = weighted_lp_norm(in.f, t.p, ab) * weighted_lp_norm(in.g, t.q, ab);
    if (den == 0.0) throw std::invalid_argument("input norms vanish");
    return weighted_lp_norm(out, t.r, a) / den;
}

}

ExponentTriple::ExponentTriple(double p_, double q_, double r_) : p(p_), q(q_), r(r_) {
    for (double v : {p, q, r})
        if (!(v >= 1.0)) throw std::invalid_argument("Lebesgue exponents must be >= 1");
}

std::string ExponentTriple::str() const { return "(" + fmt_exp(p) + "," + fmt_exp(q) + "," + fmt_exp(r) + ")"; }

bool admissible(const ExponentTriple& t) {
    const double eps = 1e-12;
    double a = t.ip(), b = t.iq(), c = t.ir();
    return a + b + c <= 2.0 + eps && a + b - c >= 1.0 - eps && a - b - c <= eps && a - b + c >= -eps;
}

double predicted_exponent(const ExponentTriple& t, int d) {
    if (!admissible(t)) throw std::invalid_argument("triple " + t.str() + " is not admissible");
    return -0.5 * d * (t.ip() + t.iq() - t.ir());
}

DecayFit fit_power_law(const std::vector<double>& lambdas, const std::vector<double>& ratios, bool drop_first_octave) {
    if (lambdas.size() != ratios.size()) throw std::invalid_argument("lambda and ratio lists differ in length");
    if (lambdas.size() < 4) throw std::invalid_argument("a decay fit needs at least 4 samples");
    DecayFit fit;
    fit.lambdas = lambdas;
    fit.ratios = ratios;
    double lo = lambdas.front();
    for (double l : lambdas) lo = std::min(lo, l);
    std::vector<double> x, y;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (drop_first_octave && lambdas[i] < 2.0 * lo * (1.0 - 1e-12)) continue;
        if (!(ratios[i] > 0.0)) throw std::invalid_argument("ratios must be positive for a log-log fit");
        x.push_back(std::log(lambdas[i]));
        y.push_back(std::log(ratios[i]));
    }
    if (x.size() < 2) throw std::invalid_argument("too few samples left after dropping the first octave");
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
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double e = y[i] - (fit.intercept + fit.slope * x[i]);
        ss += e * e;
    }
    fit.residual = std::sqrt(ss / n);
    fit.fit_lambda_min = std::exp(x.front());
    fit.fit_lambda_max = std::exp(x.back());
    fit.fit_points = x.size();
    return fit;
}

SweepInputs sweep_inputs(const Phase& phi, const SampledField& f, const SampledField& g, double lambda,
                         const SweepOptions& opt) {
    switch (opt.family) {
        case InputFamily::Fixed:
            return {f, g};
        case InputFamily::Dispersed: {
            auto s = canonical_split(phi);
            return {free_propagator(f, lambda * s.beta), free_propagator(g, lambda * s.gamma)};
        }
        case InputFamily::Translated:
            return {translate(f, lambda * opt.velocity), g};
    }
    return {f, g};
}

DecayFit lambda_sweep(const Phase& phi, const Symbol& m, const SampledField& f, const SampledField& g,
                      const ExponentTriple& t, const std::vector<double>& lambdas, const SweepOptions& opt) {
    auto rows = exponent_table(phi, m, f, g, {t}, lambdas, opt);
    return rows.front().fit;
}

std::vector<ExponentRow> exponent_table(const Phase& phi, const Symbol& m, const SampledField& f, const SampledField& g,
                                        const std::vector<ExponentTriple>& triples, const std::vector<double>& lambdas,
                                        const SweepOptions& opt) {
    check_lambdas(lambdas);
    if (triples.empty()) throw std::invalid_argument("no exponent triples given");
    if (max_abs(f) == 0.0 || max_abs(g) == 0.0) throw std::invalid_argument("sweep inputs must be nonzero");
    double radius = 0.0;
    Symbol sym = prepare_symbol(m, opt, radius);
    std::vector<std::vector<double>> ratios(triples.size());
    for (double lam : lambdas) {
        SweepInputs in = sweep_inputs(phi, f, g, lam, opt);
        SampledField out = evaluate(phi, sym, lam, in.f, in.g, opt.path);
        for (std::size_t i = 0; i < triples.size(); ++i) ratios[i].push_back(ratio_for(out, in, triples[i], opt));
    }
    std::vector<ExponentRow> rows;
    for (std::size_t i = 0; i < triples.size(); ++i) {
        ExponentRow row;
        row.triple = triples[i];
        row.admissible = admissible(triples[i]);
        row.fit = fit_power_law(lambdas, ratios[i], opt.drop_first_octave);
        row.fit.truncation_radius = radius;
        if (row.admissible) {
            // the weighted estimate gains lambda^{-b} on top of the unweighted exponent
            row.predicted = predicted_exponent(triples[i], phi.dim()) - opt.weight_b;
            row.fit.predicted = row.predicted;
            row.gap = std::abs(row.fit.slope - *row.predicted);
        }
        rows.push_back(row);
    }
    return rows;
}

}
