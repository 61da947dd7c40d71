#include "oscint/finite_part.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "oscint/parallel.hpp"

namespace oscint {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI{0.0, 1.0};

}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int order)
{
    if (order < 1 || order > 256) throw std::invalid_argument("gauss_legendre: order must be in [1,256]");
    static std::mutex mu;
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;

    std::vector<double> x(order), w(order);
    const int n = order;
    if (n == 1) {
        x[0] = 0.0;
        w[0] = 2.0;
    }
    for (int i = 0; n > 1 && i < (n + 1) / 2; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    cache[order] = {x, w};
    return {x, w};
}

namespace {

// Piecewise-geometric breakpoints: [0,1], [1,2], [2,4], ... clipped to [a,b]
std::vector<double> geometric_breaks(double a, double b)
{
    std::vector<double> br{a};
    double edge = 1.0;
    if (a >= 1.0) edge = std::exp2(std::floor(std::log2(a)) + 1.0);
    while (edge < b) {
        if (edge > a) br.push_back(edge);
        edge *= 2.0;
    }
    br.push_back(b);
    return br;
}

template <class V, class Eval, class Norm>
V gl_panel(const Eval& F, double a, double b, const std::vector<double>& x, const std::vector<double>& w, const Norm&)
{
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    V acc = F(mid + half * x[0]);
    acc *= w[0] * half;
    for (std::size_t i = 1; i < x.size(); ++i) {
        V v = F(mid + half * x[i]);
        v *= w[i] * half;
        acc += v;
    }
    return acc;
}

template <class V, class Eval, class Norm>
V adaptive_gl(const Eval& F, double a, double b, const V& whole, double tol, int depth, const LambdaQuadrature& q,
              const std::vector<double>& x, const std::vector<double>& w, const Norm& norm)
{
    const double m = 0.5 * (a + b);
    V left = gl_panel<V>(F, a, m, x, w, norm);
    V right = gl_panel<V>(F, m, b, x, w, norm);
    V both = left;
    both += right;
    V diff = both;
    diff -= whole;
    if (norm(diff) <= tol) return both;
    if (depth >= q.max_depth) throw std::runtime_error("lambda quadrature did not converge");
    V l = adaptive_gl<V>(F, a, m, left, 0.5 * tol, depth + 1, q, x, w, norm);
    V r = adaptive_gl<V>(F, m, b, right, 0.5 * tol, depth + 1, q, x, w, norm);
    l += r;
    return l;
}

struct ScalarBox {
    cplx v{0.0, 0.0};
    ScalarBox() = default;
    ScalarBox(cplx z) : v(z) {}
    ScalarBox& operator+=(const ScalarBox& o)
    {
        v += o.v;
        return *this;
    }
    ScalarBox& operator-=(const ScalarBox& o)
    {
        v -= o.v;
        return *this;
    }
    ScalarBox& operator*=(double s)
    {
        v *= s;
        return *this;
    }
};

struct PairingIntegrand {
    std::vector<double> phi;
    std::vector<cplx> fw;  // f times cell volume
    double l1 = 0.0;
    double phi_max = 0.0;
    double grad_max = 0.0;  // largest phase gradient component where f is not negligible
    double h = 0.0;

    PairingIntegrand(const ScalarPhase& ph, const SampledField& f)
    {
        SampledField fx = f.space == Space::Physical ? f : inverse_transform(f);
        const double cell = fx.grid.cell(Space::Physical);
        phi.resize(fx.size());
        fw.resize(fx.size());
        double fmax = 0.0;
        for (auto& v : fx.values) fmax = std::max(fmax, std::abs(v));
        for (std::size_t j = 0; j < fx.size(); ++j) {
            phi[j] = ph(fx.grid.point(j, Space::Physical));
            if (!std::isfinite(phi[j])) throw std::invalid_argument("dt_pairing: phase is not finite on the grid");
            fw[j] = fx.values[j] * cell;
            l1 += std::abs(fw[j]);
            if (std::abs(fx.values[j]) > 1e-12 * fmax) {
                phi_max = std::max(phi_max, std::abs(phi[j]));
                const Point p = fx.grid.point(j, Space::Physical);
                for (int k = 0; k < fx.grid.d; ++k) {
                    const double step = 1e-6 * (1.0 + std::abs(p[k]));
                    Point a = p, b = p;
                    a[k] += step;
                    b[k] -= step;
                    grad_max = std::max(grad_max, std::abs(ph(a) - ph(b)) / (2.0 * step));
                }
            }
        }
        h = fx.grid.spacing();
    }

    // I(lambda) = sum_j e^{i lambda phi_j} f_j h^d, blocked so the sum order is fixed
    cplx operator()(double lambda) const
    {
        constexpr std::size_t block = 4096;
        const std::size_t nb = (fw.size() + block - 1) / block;
        std::vector<cplx> part(nb);
        parallel_for(0, nb, [&](std::size_t b) {
            cplx s{0.0, 0.0};
            const std::size_t e = std::min(fw.size(), (b + 1) * block);
            for (std::size_t j = b * block; j < e; ++j) s += std::polar(1.0, lambda * phi[j]) * fw[j];
            part[b] = s;
        });
        cplx s{0.0, 0.0};
        for (auto& v : part) s += v;
        return s;
    }
};

}

std::vector<cplx> dt_pairing_schedule(const ScalarPhase& phi, const SampledField& f, const std::vector<double>& T_list,
                                      const LambdaQuadrature& q)
{
    for (std::size_t i = 0; i < T_list.size(); ++i) {
        if (!(T_list[i] >= 0.0) || !std::isfinite(T_list[i])) throw std::invalid_argument("dt_pairing: T must be finite and >= 0");
        if (i > 0 && T_list[i] <= T_list[i - 1]) throw std::invalid_argument("dt_pairing: T_list must be increasing");
    }
    std::vector<cplx> out(T_list.size(), cplx{0.0, 0.0});
    if (T_list.empty() || T_list.back() == 0.0) return out;

    PairingIntegrand I(phi, f);
    if (I.l1 == 0.0) return out;
    // beyond this the x-grid aliases e^{iT phi} back onto low frequencies
    if (T_list.back() * I.grad_max * I.h >= 2.0 * kPi)
        throw std::invalid_argument("dt_pairing: grid does not resolve e^{iT phi}: T*max|grad phi|*h = " +
                                    std::to_string(T_list.back() * I.grad_max * I.h) + " >= 2 pi");
    auto [x, w] = gauss_legendre(q.order);
    auto F = [&](double l) { return ScalarBox(I(l)); };
    auto norm = [](const ScalarBox& b) { return std::abs(b.v); };

    // pieces short enough that one Gauss-Legendre panel sees a few oscillations at most
    const double piece = I.phi_max > 0.0 ? std::max(1e-3, 6.0 * kPi / I.phi_max) : 1e300;

    std::vector<double> br = geometric_breaks(0.0, T_list.back());
    for (double t : T_list) br.push_back(t);
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());

    std::vector<double> cuts;
    for (std::size_t i = 0; i + 1 < br.size(); ++i) {
        const int m = std::max(1, static_cast<int>(std::ceil((br[i + 1] - br[i]) / piece)));
        for (int k = 0; k < m; ++k) cuts.push_back(br[i] + (br[i + 1] - br[i]) * k / m);
    }
    cuts.push_back(br.back());

    const double total = T_list.back();
    const double tol_density = q.rel_tol * I.l1 / total;
    cplx acc{0.0, 0.0};
    std::size_t next = 0;
    while (next < T_list.size() && T_list[next] == 0.0) ++next;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i], b = cuts[i + 1];
        ScalarBox whole = gl_panel<ScalarBox>(F, a, b, x, w, norm);
        acc += adaptive_gl<ScalarBox>(F, a, b, whole, tol_density * (b - a), 0, q, x, w, norm).v;
        while (next < T_list.size() && std::abs(T_list[next] - b) <= 1e-12 * std::max(1.0, b)) out[next++] = -kI * acc;
    }
    return out;
}

cplx dt_pairing(const ScalarPhase& phi, const SampledField& f, double T, const LambdaQuadrature& q)
{
    return dt_pairing_schedule(phi, f, {T}, q)[0];
}

FpExtrapolation dt_extrapolate(const ScalarPhase& phi, const SampledField& f, const std::vector<double>& T_list,
                               const LambdaQuadrature& q)
{
    if (T_list.size() < 2) throw std::invalid_argument("dt_extrapolate: need at least two truncation levels");
    if (T_list.front() <= 0.0) throw std::invalid_argument("dt_extrapolate: truncation levels must be positive");
    const double ratio = T_list[1] / T_list[0];
    for (std::size_t i = 1; i < T_list.size(); ++i)
        if (std::abs(T_list[i] / T_list[i - 1] - ratio) > 1e-9 * ratio || ratio <= 1.0)
            throw std::invalid_argument("dt_extrapolate: T_list must be geometric and increasing");

    FpExtrapolation ex;
    ex.T = T_list;
    ex.values = dt_pairing_schedule(phi, f, T_list, q);

    double scale = 0.0;
    for (auto& v : ex.values) scale = std::max(scale, std::abs(v));
    const double floor = 1e-11 * std::max(scale, 1e-300);
    for (std::size_t i = 1; i < ex.values.size(); ++i) ex.decrements.push_back(std::abs(ex.values[i] - ex.values[i - 1]));

    // fit log decrement against log T over the levels above roundoff
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < ex.decrements.size(); ++i) {
        if (ex.decrements[i] > floor) {
            lx.push_back(std::log(T_list[i + 1]));
            ly.push_back(std::log(ex.decrements[i]));
        }
    }
    ex.extrapolated = ex.values.back();
    if (ex.decrements.back() <= floor) {
        ex.at_roundoff = true;
        return ex;
    }
    if (lx.size() >= 2) {
        const double n = static_cast<double>(lx.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sx += lx[i];
            sy += ly[i];
            sxx += lx[i] * lx[i];
            sxy += lx[i] * ly[i];
        }
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        const double icpt = (sy - slope * sx) / n;
        for (std::size_t i = 0; i < lx.size(); ++i) ex.decrement_residual = std::max(ex.decrement_residual, std::abs(ly[i] - icpt - slope * lx[i]));
        ex.delta = 1.0 - slope;
        if (*ex.delta > 1.0) {
            const double g = std::pow(ratio, 1.0 - *ex.delta);
            const std::size_t k = ex.values.size() - 1;
            ex.extrapolated = ex.values[k] + (ex.values[k] - ex.values[k - 1]) * (g / (1.0 - g));
        }
    }
    return ex;
}

namespace {

double locate_root(const std::function<double(double)>& phi, double lo, double hi)
{
    double flo = phi(lo);
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = phi(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    if (hi - lo > 1e-12) throw std::runtime_error("fp_reference_pairing: root bisection failed");
    return 0.5 * (lo + hi);
}

cplx composite_gl(const std::function<cplx(double)>& g, double a, double b, int pieces)
{
    auto [x, w] = gauss_legendre(24);
    cplx s{0.0, 0.0};
    for (int k = 0; k < pieces; ++k) {
        const double lo = a + (b - a) * k / pieces, hi = a + (b - a) * (k + 1) / pieces;
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * half * g(mid + half * x[i]);
    }
    return s;
}

}

cplx fp_reference_pairing(const std::function<double(double)>& phi, const std::function<cplx(double)>& f, double a, double b,
                          const std::function<double(double)>& dphi)
{
    if (!(a < b)) throw std::invalid_argument("fp_reference_pairing: empty interval");
    const int scan = 8192;
    std::vector<double> roots;
    double xp = a, fp = phi(a);
    if (fp == 0.0) throw std::runtime_error("fp_reference_pairing: root on the interval boundary");
    for (int k = 1; k <= scan; ++k) {
        const double xk = a + (b - a) * k / scan;
        const double fk = phi(xk);
        if (!std::isfinite(fk)) throw std::invalid_argument("fp_reference_pairing: phase not finite");
        if (fk == 0.0 && k == scan) throw std::runtime_error("fp_reference_pairing: root on the interval boundary");
        if ((fk < 0.0) != (fp < 0.0) || fk == 0.0) {
            roots.push_back(fk == 0.0 ? xk : locate_root(phi, xp, xk));
            if (fk == 0.0 && k < scan) {
                // step past the exact zero
                ++k;
                xp = a + (b - a) * k / scan;
                fp = phi(xp);
                continue;
            }
        }
        xp = xk;
        fp = fk;
    }

    auto deriv = [&](double x0) {
        if (dphi) return dphi(x0);
        const double h = 1e-6 * (1.0 + std::abs(x0));
        return (phi(x0 + h) - phi(x0 - h)) / (2.0 * h);
    };

    std::vector<double> radius(roots.size());
    cplx boundary{0.0, 0.0};
    for (std::size_t i = 0; i < roots.size(); ++i) {
        const double d1 = std::abs(deriv(roots[i]));
        if (d1 < 1e-8) throw std::runtime_error("fp_reference_pairing: |phi'| below tolerance at a root");
        boundary += f(roots[i]) / d1;
        double r = std::min(roots[i] - a, b - roots[i]);
        if (i > 0) r = std::min(r, 0.5 * (roots[i] - roots[i - 1]));
        if (i + 1 < roots.size()) r = std::min(r, 0.5 * (roots[i + 1] - roots[i]));
        if (r <= 0.0) throw std::runtime_error("fp_reference_pairing: root on the interval boundary");
        radius[i] = 0.5 * r;
    }

    auto g = [&](double x) { return f(x) / phi(x); };
    cplx pv{0.0, 0.0};
    // symmetric pairing around each root; the odd part cancels before integration
    for (std::size_t i = 0; i < roots.size(); ++i) {
        const double x0 = roots[i];
        auto paired = [&](double t) { return g(x0 + t) + g(x0 - t); };
        pv += composite_gl(paired, 0.0, radius[i], 16);
    }
    // regular remainder between the excised windows
    double lo = a;
    const double span = b - a;
    auto far = [&](double from, double to) {
        if (to <= from) return;
        const int pieces = std::max(4, static_cast<int>(std::ceil(400.0 * (to - from) / span)));
        pv += composite_gl(g, from, to, pieces);
    };
    for (std::size_t i = 0; i < roots.size(); ++i) {
        far(lo, roots[i] - radius[i]);
        lo = roots[i] + radius[i];
    }
    far(lo, b);
    return pv - kI * kPi * boundary;
}

cplx fp_reference_pairing(const std::function<double(double)>& phi, const SampledField& f,
                          const std::function<double(double)>& dphi)
{
    if (f.grid.d != 1) throw std::invalid_argument("fp_reference_pairing: sampled input must be one-dimensional");
    SampledField fx = f.space == Space::Physical ? f : inverse_transform(f);
    const GridSpec& gs = fx.grid;
    const double h = gs.spacing();
    const int n = static_cast<int>(gs.n);
    auto interp = [&](double x) {
        const double s = (x + gs.half_width) / h;
        int j0 = static_cast<int>(std::floor(s)) - 3;
        j0 = std::clamp(j0, 0, n - 8);
        cplx acc{0.0, 0.0};
        for (int i = 0; i < 8; ++i) {
            double li = 1.0;
            for (int k = 0; k < 8; ++k)
                if (k != i) li *= (s - (j0 + k)) / static_cast<double>(i - k);
            acc += li * fx.values[j0 + i];
        }
        return acc;
    };
    return fp_reference_pairing(phi, interp, gs.x(0), gs.x(n - 1), dphi);
}

SampledField integrate_field(const std::function<SampledField(double)>& F, double a, double b, const LambdaQuadrature& q,
                             std::size_t* evaluations, const std::function<void(double, const SampledField&)>& observe,
                             const std::vector<double>& checkpoints, std::vector<SampledField>* partials)
{
    if (!(a < b)) throw std::invalid_argument("integrate_field: empty interval");
    for (double c : checkpoints)
        if (!(c > a && c < b)) throw std::invalid_argument("integrate_field: checkpoint outside the interval");
    auto [x, w] = gauss_legendre(q.order);
    std::atomic<std::size_t> count{0};
    std::mutex obs_mu;
    auto eval = [&](double l) {
        SampledField v = F(l);
        ++count;
        if (observe) {
            std::lock_guard lock(obs_mu);
            observe(l, v);
        }
        return v;
    };
    auto norm = [](const SampledField& v) { return lp_norm(v, 2.0); };

    std::vector<double> br = geometric_breaks(a, b);
    br.insert(br.end(), checkpoints.begin(), checkpoints.end());
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());
    std::vector<double> cuts;
    for (std::size_t i = 0; i + 1 < br.size(); ++i) {
        const int m = std::max(1, static_cast<int>(std::ceil(br[i + 1] - br[i])));
        for (int k = 0; k < m; ++k) cuts.push_back(br[i] + (br[i + 1] - br[i]) * k / m);
    }
    cuts.push_back(b);
    const std::size_t np = cuts.size() - 1;

    std::vector<SampledField> coarse(np);
    parallel_for(0, np, [&](std::size_t i) { coarse[i] = gl_panel<SampledField>(eval, cuts[i], cuts[i + 1], x, w, norm); });
    double scale = 0.0;
    for (auto& c : coarse) scale += norm(c);
    std::vector<SampledField> fine(np);
    if (scale == 0.0) {
        fine = coarse;
    } else {
        parallel_for(0, np, [&](std::size_t i) {
            const double tol = q.rel_tol * scale * (cuts[i + 1] - cuts[i]) / (b - a);
            fine[i] = adaptive_gl<SampledField>(eval, cuts[i], cuts[i + 1], coarse[i], tol, 0, q, x, w, norm);
        });
    }
    if (partials) partials->assign(checkpoints.size(), SampledField());
    SampledField acc = fine[0];
    for (std::size_t i = 0; i < np; ++i) {
        if (i > 0) acc += fine[i];
        if (partials)
            for (std::size_t c = 0; c < checkpoints.size(); ++c)
                if (checkpoints[c] == cuts[i + 1]) (*partials)[c] = acc;
    }
    if (evaluations) *evaluations += count.load();
    return acc;
}

double fp_decay_exponent(const ExponentTriple& t, int d)
{
    return 0.5 * d * (t.ip() + t.iq() - t.ir());
}

FpBilinearResult fp_bilinear_apply(const Phase& phi, const Symbol& m, const SampledField& f, const SampledField& g,
                                   const FinitePartConfig& cfg, const ExponentTriple& t)
{
    const int d = f.grid.d;
    if (!(f.grid == g.grid)) throw std::invalid_argument("fp_bilinear_apply: inputs on different grids");
    if (phi.kind() == Phase::Kind::Callable) throw std::invalid_argument("fp_bilinear_apply: phase must be quadratic");
    if (phi.dim() != d) throw std::invalid_argument("fp_bilinear_apply: phase dimension does not match the grid");
    const double rho = cfg.rho.value_or(fp_decay_exponent(t, d));
    if (!(rho > 1.0)) {
        std::string msg = "fp_bilinear_apply: decay exponent rho = " + std::to_string(rho) + " <= 1, lambda integral does not converge";
        if (d == 1) msg += "; in dimension 1, (d/2)(1/p+1/q-1/r) is at most 1 for every admissible triple";
        throw std::invalid_argument(msg);
    }
    if (!admissible(t)) throw std::invalid_argument("fp_bilinear_apply: exponent triple " + t.str() + " is not admissible");
    if (!(cfg.lambda_max > 1.0)) throw std::invalid_argument("fp_bilinear_apply: lambda_max must exceed 1");
    for (std::size_t i = 1; i < cfg.T_list.size(); ++i)
        if (cfg.T_list[i] <= cfg.T_list[i - 1]) throw std::invalid_argument("fp_bilinear_apply: T_list must be increasing");
    if (!cfg.T_list.empty() && cfg.lambda_max < cfg.T_list.back())
        throw std::invalid_argument("fp_bilinear_apply: lambda_max below the largest truncation level");

    FpBilinearResult res;
    res.rho = rho;
    res.field = SampledField(f.grid, Space::Physical);
    if (m.is_zero()) return res;

    OscillatoryOp op{phi, m, 0.0, f.grid};
    const double last_lo = std::max(1.0, std::exp2(std::ceil(std::log2(cfg.lambda_max)) - 1.0));
    double c_emp = 0.0;
    auto observe = [&](double l, const SampledField& v) {
        if (l >= last_lo) c_emp = std::max(c_emp, lp_norm(v, t.r) * std::pow(l, rho));
    };
    auto B = [&](double l) {
        OscillatoryOp o = op;
        o.lambda = l;
        return apply_factored(o, f, g);
    };
    std::vector<double> levels, checks;
    for (double div : {8.0, 4.0, 2.0}) {
        const double l = cfg.lambda_max / div;
        if (l >= 1.0) levels.push_back(l);
        if (l > 1.0) checks.push_back(l);
    }
    std::vector<SampledField> partials;
    SampledField I = integrate_field(B, 1.0, cfg.lambda_max, cfg.quad, &res.evaluations, observe, checks, &partials);
    I *= -kI;
    for (double l : levels) {
        if (l == 1.0) {
            res.window_partials.emplace_back(l, SampledField(f.grid, Space::Physical));
            continue;
        }
        auto it = std::find(checks.begin(), checks.end(), l);
        SampledField p = partials[it - checks.begin()];
        p *= -kI;
        res.window_partials.emplace_back(l, std::move(p));
    }
    res.field = std::move(I);
    res.c_emp = c_emp;
    res.tail_estimate = c_emp * std::pow(cfg.lambda_max, 1.0 - rho) / (rho - 1.0);
    return res;
}

}
