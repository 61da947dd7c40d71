#include "oscint/engine.hpp"

#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "oscint/parallel.hpp"

namespace oscint {

namespace {

constexpr double kPi = std::numbers::pi;
std::atomic<double> g_budget{268435456.0};  // 2^28

struct Box {
    int d = 1;
    std::size_t lo[2]{0, 0}, hi[2]{0, 0};  // inclusive; empty when lo > hi on any axis
    bool empty() const {
        for (int a = 0; a < d; ++a)
            if (lo[a] > hi[a]) return true;
        return false;
    }
    std::size_t count() const {
        if (empty()) return 0;
        std::size_t c = 1;
        for (int a = 0; a < d; ++a) c *= hi[a] - lo[a] + 1;
        return c;
    }
};

// Grid indices whose frequency lies in [c - r, c + r] on each axis.
Box freq_box(const GridSpec& g, const Point& c, double r) {
    Box b;
    b.d = g.d;
    double dxi = g.freq_spacing();
    double half = static_cast<double>(g.n / 2);
    for (int a = 0; a < g.d; ++a) {
        double klo = std::ceil((c[a] - r) / dxi + half - 1e-9);
        double khi = std::floor((c[a] + r) / dxi + half + 1e-9);
        klo = std::max(klo, 0.0);
        khi = std::min(khi, static_cast<double>(g.n - 1));
        if (klo > khi) {
            b.lo[a] = 1;
            b.hi[a] = 0;
        } else {
            b.lo[a] = static_cast<std::size_t>(klo);
            b.hi[a] = static_cast<std::size_t>(khi);
        }
    }
    return b;
}

Box full_box(const GridSpec& g) {
    Box b;
    b.d = g.d;
    for (int a = 0; a < g.d; ++a) {
        b.lo[a] = 0;
        b.hi[a] = g.n - 1;
    }
    return b;
}

std::vector<std::size_t> box_indices(const Box& b, std::size_t n) {
    std::vector<std::size_t> out;
    if (b.empty()) return out;
    out.reserve(b.count());
    if (b.d == 1) {
        for (std::size_t i = b.lo[0]; i <= b.hi[0]; ++i) out.push_back(i);
    } else {
        for (std::size_t i = b.lo[0]; i <= b.hi[0]; ++i)
            for (std::size_t j = b.lo[1]; j <= b.hi[1]; ++j) out.push_back(i * n + j);
    }
    return out;
}

struct ConvBoxes {
    Box eta, xi, out;
};

ConvBoxes conv_boxes(const GridSpec& g, const Symbol& m) {
    ConvBoxes cb;
    if (m.bounded()) {
        const SupportBall& s = *m.support();
        cb.eta = freq_box(g, s.eta_center, s.radius);
        cb.xi = freq_box(g, s.xi_center, s.radius);
    } else {
        cb.eta = full_box(g);
        cb.xi = full_box(g);
    }
    cb.out.d = g.d;
    long half = static_cast<long>(g.n / 2);
    for (int a = 0; a < g.d; ++a) {
        long lo = static_cast<long>(cb.eta.lo[a]) + static_cast<long>(cb.xi.lo[a]) - half;
        long hi = static_cast<long>(cb.eta.hi[a]) + static_cast<long>(cb.xi.hi[a]) - half;
        lo = std::max(lo, 0L);
        hi = std::min(hi, static_cast<long>(g.n) - 1);
        if (cb.eta.empty() || cb.xi.empty() || lo > hi) {
            cb.out.lo[a] = 1;
            cb.out.hi[a] = 0;
        } else {
            cb.out.lo[a] = static_cast<std::size_t>(lo);
            cb.out.hi[a] = static_cast<std::size_t>(hi);
        }
    }
    return cb;
}

void require_spectra(const SampledField& fh, const SampledField& gh) {
    if (fh.space != Space::Frequency || gh.space != Space::Frequency)
        throw std::invalid_argument("expected frequency-space fields");
    if (!(fh.grid == gh.grid)) throw std::invalid_argument("input fields live on different grids");
}

SampledField to_hat(const SampledField& f) { return f.space == Space::Frequency ? f : forward_transform(f); }

void require_op_grid(const OscillatoryOp& op, const SampledField& f, const SampledField& g) {
    if (!(f.grid == op.grid) || !(g.grid == op.grid)) throw std::invalid_argument("input grid does not match operator grid");
    if (op.phase.dim() != op.grid.d || op.symbol.dim() != op.grid.d)
        throw std::invalid_argument("phase/symbol dimension does not match grid");
}

// Inner sum over eta for one output frequency index k (flat); xi' = xi_k - eta_l.
template <class AmpFn>
cplx conv_row(const GridSpec& g, const ConvBoxes& cb, std::size_t k, const SampledField& fh, const SampledField& gh,
              AmpFn&& amp) {
    const std::size_t n = g.n;
    const long half = static_cast<long>(n / 2);
    cplx acc(0.0);
    if (g.d == 1) {
        for (std::size_t l = cb.eta.lo[0]; l <= cb.eta.hi[0]; ++l) {
            long q = static_cast<long>(k) - static_cast<long>(l) + half;
            if (q < static_cast<long>(cb.xi.lo[0]) || q > static_cast<long>(cb.xi.hi[0])) continue;
            cplx fg = fh.values[l] * gh.values[static_cast<std::size_t>(q)];
            if (fg == cplx(0.0)) continue;
            acc += amp(l, static_cast<std::size_t>(q)) * fg;
        }
        return acc;
    }
    long k0 = static_cast<long>(k / n), k1 = static_cast<long>(k % n);
    for (std::size_t l0 = cb.eta.lo[0]; l0 <= cb.eta.hi[0]; ++l0) {
        long q0 = k0 - static_cast<long>(l0) + half;
        if (q0 < static_cast<long>(cb.xi.lo[0]) || q0 > static_cast<long>(cb.xi.hi[0])) continue;
        for (std::size_t l1 = cb.eta.lo[1]; l1 <= cb.eta.hi[1]; ++l1) {
            long q1 = k1 - static_cast<long>(l1) + half;
            if (q1 < static_cast<long>(cb.xi.lo[1]) || q1 > static_cast<long>(cb.xi.hi[1])) continue;
            std::size_t l = l0 * n + l1;
            std::size_t q = static_cast<std::size_t>(q0) * n + static_cast<std::size_t>(q1);
            cplx fg = fh.values[l] * gh.values[q];
            if (fg == cplx(0.0)) continue;
            acc += amp(l, q) * fg;
        }
    }
    return acc;
}

void check_budget(double terms) {
    if (terms > g_budget.load())
        throw std::runtime_error("direct quadrature budget exceeded (" + std::to_string(terms) + " terms)");
}

}

void set_direct_budget(double terms) {
    if (!(terms > 0.0)) throw std::invalid_argument("budget must be positive");
    g_budget = terms;
}

double direct_budget() { return g_budget.load(); }

SampledField direct_hat(const Phase& phi, const Symbol& m, double lambda, const SampledField& fh, const SampledField& gh) {
    require_spectra(fh, gh);
    if (m.x_dependent()) throw std::invalid_argument("direct_hat requires an x-independent symbol");
    const GridSpec& g = fh.grid;
    SampledField out(g, Space::Frequency);
    if (m.is_zero()) return out;
    ConvBoxes cb = conv_boxes(g, m);
    check_budget(static_cast<double>(cb.out.count()) * static_cast<double>(cb.eta.count()));
    std::vector<std::size_t> rows = box_indices(cb.out, g.n);
    const double cell = g.cell(Space::Frequency);
    parallel_for(0, rows.size(), [&](std::size_t r) {
        std::size_t k = rows[r];
        cplx acc = conv_row(g, cb, k, fh, gh, [&](std::size_t l, std::size_t q) {
            Point eta = g.point(l, Space::Frequency);
            Point xi = g.point(q, Space::Frequency);
            cplx mv = m(eta, xi);
            if (mv == cplx(0.0)) return cplx(0.0);
            return lambda == 0.0 ? mv : mv * std::polar(1.0, lambda * phi(eta, xi));
        });
        out.values[k] = acc * cell;
    });
    return out;
}

SampledField pseudoproduct_hat(const Symbol& m, const SampledField& fh, const SampledField& gh) {
    require_spectra(fh, gh);
    if (m.x_dependent()) throw std::invalid_argument("pseudo-product requires an x-independent symbol");
    const GridSpec& g = fh.grid;
    if (m.kind() != Symbol::Kind::Constant) return direct_hat(Phase::scalar(0, 0, 0, g.d), m, 0.0, fh, gh);
    SampledField out(g, Space::Frequency);
    if (m.is_zero()) return out;
    // Zero padding to 2n per axis turns the circular product into the linear
    // frequency convolution restricted to the central n^d block.
    const std::size_t n = g.n, N = 2 * n, off = n / 2;
    GridSpec G(g.d, N, g.half_width);
    SampledField A(G, Space::Frequency), B(G, Space::Frequency);
    auto big = [&](std::size_t k) {
        if (g.d == 1) return k + off;
        return (k / n + off) * N + (k % n + off);
    };
    for (std::size_t k = 0; k < g.size(); ++k) {
        A.values[big(k)] = fh.values[k];
        B.values[big(k)] = gh.values[k];
    }
    SampledField a = inverse_transform(A), b = inverse_transform(B);
    for (std::size_t j = 0; j < a.size(); ++j) a.values[j] *= b.values[j];
    SampledField P = forward_transform(a);
    const cplx scale = m.constant_value() * std::pow(2.0 * kPi, 0.5 * g.d);
    for (std::size_t k = 0; k < g.size(); ++k) out.values[k] = scale * P.values[big(k)];
    return out;
}

SampledField apply_direct(const OscillatoryOp& op, const SampledField& f, const SampledField& g) {
    require_op_grid(op, f, g);
    SampledField fh = to_hat(f), gh = to_hat(g);
    if (!op.symbol.x_dependent()) return inverse_transform(direct_hat(op.phase, op.symbol, op.lambda, fh, gh));

    const GridSpec& grid = op.grid;
    SampledField out(grid, Space::Physical);
    ConvBoxes cb = conv_boxes(grid, op.symbol);
    check_budget(static_cast<double>(grid.size()) * static_cast<double>(cb.out.count()) *
                 static_cast<double>(cb.eta.count()));
    std::vector<std::size_t> rows = box_indices(cb.out, grid.n);
    const double cell = grid.cell(Space::Frequency);
    const double norm = cell * cell / std::pow(2.0 * kPi, 0.5 * grid.d);
    const double lambda = op.lambda;
    parallel_for(0, grid.size(), [&](std::size_t j) {
        Point x = grid.point(j, Space::Physical);
        cplx total(0.0);
        for (std::size_t k : rows) {
            Point xik = grid.point(k, Space::Frequency);
            cplx inner = conv_row(grid, cb, k, fh, gh, [&](std::size_t l, std::size_t q) {
                Point eta = grid.point(l, Space::Frequency);
                Point xi = grid.point(q, Space::Frequency);
                cplx mv = op.symbol(x, eta, xi);
                if (mv == cplx(0.0)) return cplx(0.0);
                return mv * std::polar(1.0, lambda * op.phase(eta, xi));
            });
            total += std::polar(1.0, dot(x, xik)) * inner;
        }
        out.values[j] = total * norm;
    });
    return out;
}

SampledField apply_factored(const OscillatoryOp& op, const SampledField& f, const SampledField& g) {
    require_op_grid(op, f, g);
    if (!op.phase.is_scalar()) throw std::invalid_argument("factored path requires a scalar quadratic phase");
    if (op.symbol.x_dependent()) throw std::invalid_argument("factored path requires an x-independent symbol");
    auto [alpha, beta, gamma] = canonical_split(op.phase);
    const double lam = op.lambda;
    SampledField fh = to_hat(f), gh = to_hat(g);
    // e^{-i s Laplacian} is the multiplier e^{i s |xi|^2}
    for (std::size_t k = 0; k < fh.size(); ++k) {
        double r2 = norm2(fh.grid.point(k, Space::Frequency));
        fh.values[k] *= std::polar(1.0, lam * beta * r2);
        gh.values[k] *= std::polar(1.0, lam * gamma * r2);
    }
    SampledField h = pseudoproduct_hat(op.symbol, fh, gh);
    for (std::size_t k = 0; k < h.size(); ++k)
        h.values[k] *= std::polar(1.0, lam * alpha * norm2(h.grid.point(k, Space::Frequency)));
    return inverse_transform(h);
}

SampledField apply_pseudoproduct(const Symbol& m, const SampledField& f, const SampledField& g) {
    if (!(f.grid == g.grid)) throw std::invalid_argument("input fields live on different grids");
    if (m.dim() != f.grid.d) throw std::invalid_argument("symbol dimension does not match grid");
    return inverse_transform(pseudoproduct_hat(m, to_hat(f), to_hat(g)));
}

cplx kernel(const OscillatoryOp& op, const Point& x, const Point& y, const Point& z) {
    if (op.symbol.x_dependent()) throw std::invalid_argument("kernel requires an x-independent symbol");
    if (!op.symbol.bounded()) throw std::invalid_argument("kernel requires a compactly supported symbol");
    if (op.symbol.is_zero()) return 0.0;
    const GridSpec& g = op.grid;
    const SupportBall& s = *op.symbol.support();
    std::vector<std::size_t> etas = box_indices(freq_box(g, s.eta_center, s.radius), g.n);
    std::vector<std::size_t> xis = box_indices(freq_box(g, s.xi_center, s.radius), g.n);
    check_budget(static_cast<double>(etas.size()) * static_cast<double>(xis.size()));
    Point xy = x - y, xz = x - z;
    std::vector<cplx> partial(etas.size());
    parallel_for(0, etas.size(), [&](std::size_t i) {
        Point eta = g.point(etas[i], Space::Frequency);
        cplx acc(0.0);
        for (std::size_t q : xis) {
            Point xi = g.point(q, Space::Frequency);
            cplx mv = op.symbol(eta, xi);
            if (mv == cplx(0.0)) continue;
            acc += mv * std::polar(1.0, dot(eta, xy) + dot(xi, xz) + op.lambda * op.phase(eta, xi));
        }
        partial[i] = acc;
    });
    cplx total(0.0);
    for (const auto& p : partial) total += p;
    double cell = g.cell(Space::Frequency);
    return total * cell * cell / std::pow(2.0 * kPi, g.d);
}

cplx ttstar_kernel(const OscillatoryOp& op, const Point& x, double u) {
    if (op.symbol.x_dependent()) throw std::invalid_argument("TT* kernel requires an x-independent symbol");
    if (!op.symbol.bounded()) throw std::invalid_argument("TT* kernel requires a compactly supported symbol");
    if (op.symbol.is_zero()) return 0.0;
    const int d = op.phase.dim();
    const SupportBall& s = *op.symbol.support();
    Point xi = x, eta = x;
    xi[0] += 0.5 * u;
    eta[0] -= 0.5 * u;
    // Trapezoid over the tau-projection of the support; the integrand is smooth and
    // compactly supported, so resolving the oscillation is all that is needed.
    double width = 2.0 * s.radius;
    double hnorm = op.phase.hessian(s.eta_center, s.xi_center).cwiseAbs().maxCoeff() + 1.0;
    std::size_t N = static_cast<std::size_t>(400.0 + 16.0 * std::abs(op.lambda * u) * width * hnorm);
    if (d == 2) N = std::min<std::size_t>(N, 4000);
    double h = width / static_cast<double>(N);
    auto integrand = [&](const Point& tau) {
        cplx a = op.symbol(tau, eta - tau), b = op.symbol(tau, xi - tau);
        if (a == cplx(0.0) || b == cplx(0.0)) return cplx(0.0);
        return std::conj(a) * b * std::polar(1.0, op.lambda * (op.phase(tau, xi - tau) - op.phase(tau, eta - tau)));
    };
    std::vector<cplx> partial(N + 1);
    parallel_for(0, N + 1, [&](std::size_t i) {
        Point tau = s.eta_center;
        tau[0] += -s.radius + h * static_cast<double>(i);
        if (d == 1) {
            partial[i] = integrand(tau);
            return;
        }
        cplx acc(0.0);
        for (std::size_t j = 0; j <= N; ++j) {
            Point t2 = tau;
            t2[1] = s.eta_center[1] - s.radius + h * static_cast<double>(j);
            acc += integrand(t2);
        }
        partial[i] = acc * h;
    });
    cplx total(0.0);
    for (const auto& p : partial) total += p;
    return total * h;
}

TTStarProfile ttstar_kernel_decay(const OscillatoryOp& op, const Point& x, const std::vector<double>& offsets) {
    TTStarProfile prof;
    prof.lambda = op.lambda;
    prof.offsets = offsets;
    for (double u : offsets) prof.values.push_back(std::abs(ttstar_kernel(op, x, u)));
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        double s = std::abs(op.lambda * offsets[i]);
        if (s >= 1.0 && s <= 10.0 && prof.values[i] > 0.0) {
            lx.push_back(std::log1p(s));
            ly.push_back(std::log(prof.values[i]));
        }
    }
    if (lx.size() < 2) {
        lx.clear();
        ly.clear();
        for (std::size_t i = 0; i < offsets.size(); ++i) {
            if (offsets[i] != 0.0 && prof.values[i] > 0.0) {
                lx.push_back(std::log1p(std::abs(op.lambda * offsets[i])));
                ly.push_back(std::log(prof.values[i]));
            }
        }
    }
    if (lx.size() >= 2) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            mx += lx[i];
            my += ly[i];
        }
        mx /= lx.size();
        my /= ly.size();
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sxy += (lx[i] - mx) * (ly[i] - my);
            sxx += (lx[i] - mx) * (lx[i] - mx);
        }
        prof.n_fit = sxx > 0 ? -sxy / sxx : 0.0;
    }
    return prof;
}

}
