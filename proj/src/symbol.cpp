#include "oscint/symbol.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace oscint {

namespace {

double distance2(const Point& eta, const Point& xi, const SupportBall& b) {
    return norm2(eta - b.eta_center) + norm2(xi - b.xi_center);
}

void check_dim(int d) {
    if (d != 1 && d != 2) throw std::invalid_argument("symbol dimension must be 1 or 2");
}

double slope_fit(const std::vector<double>& x, const std::vector<double>& y) {
    std::size_t n = x.size();
    if (n < 2) return 0.0;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0 ? sxy / sxx : 0.0;
}

}

Symbol Symbol::constant(cplx value, int d) {
    check_dim(d);
    Symbol m;
    m.kind_ = Kind::Constant;
    m.d_ = d;
    m.value_ = value;
    if (value == cplx(0.0)) m.support_ = SupportBall{};
    return m;
}

Symbol Symbol::bump(const Point& eta_center, const Point& xi_center, double radius, double amplitude, int d) {
    check_dim(d);
    if (!(radius > 0.0)) throw std::invalid_argument("bump radius must be positive");
    Symbol m;
    m.kind_ = Kind::SmoothBump;
    m.d_ = d;
    Point ec = eta_center, xc = xi_center;
    if (d == 1) ec[1] = xc[1] = 0.0;
    SupportBall ball{ec, xc, radius};
    m.support_ = ball;
    m.fn_ = [ball, amplitude](const Point& eta, const Point& xi) -> cplx {
        double u2 = distance2(eta, xi, ball) / (ball.radius * ball.radius);
        if (u2 >= 1.0) return 0.0;
        return amplitude * std::exp(-1.0 / (1.0 - u2));
    };
    return m;
}

Symbol Symbol::coifman_meyer(int d, Fn fn, bool homogeneous, std::optional<SupportBall> support) {
    check_dim(d);
    if (!fn) throw std::invalid_argument("symbol callable is empty");
    Symbol m;
    m.kind_ = Kind::CoifmanMeyer;
    m.d_ = d;
    m.fn_ = std::move(fn);
    m.homogeneous_ = homogeneous;
    m.support_ = support;
    return m;
}

Symbol Symbol::x_dependent(int d, XFn fn, std::optional<SupportBall> support) {
    check_dim(d);
    if (!fn) throw std::invalid_argument("symbol callable is empty");
    Symbol m;
    m.kind_ = Kind::XDependent;
    m.d_ = d;
    m.xfn_ = std::move(fn);
    m.support_ = support;
    return m;
}

cplx Symbol::operator()(const Point& eta, const Point& xi) const {
    switch (kind_) {
        case Kind::Constant:
            return value_;
        case Kind::SmoothBump:
        case Kind::CoifmanMeyer:
            return fn_(eta, xi);
        case Kind::XDependent:
            throw std::invalid_argument("x-dependent symbol evaluated without x");
    }
    return 0.0;
}

cplx Symbol::operator()(const Point& x, const Point& eta, const Point& xi) const {
    if (kind_ == Kind::XDependent) return xfn_(x, eta, xi);
    return (*this)(eta, xi);
}

cplx eval_symbol(const Symbol& m, const Point& eta, const Point& xi, const Point* x) {
    if (m.x_dependent()) {
        if (!x) throw std::invalid_argument("x-dependent symbol requires a point x");
        return m(*x, eta, xi);
    }
    return m(eta, xi);
}

double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

Symbol truncate_symbol(const Symbol& m, double R) {
    if (!(R > 0.0)) throw std::invalid_argument("truncation radius must be positive");
    auto cutoff = [R](const Point& eta, const Point& xi) {
        double r = std::sqrt(norm2(eta) + norm2(xi));
        return 1.0 - smooth_step((r - R) / R);
    };
    SupportBall ball{{0, 0}, {0, 0}, 2.0 * R};
    if (m.bounded() && m.support()->radius <= ball.radius) ball = *m.support();
    if (m.x_dependent()) {
        return Symbol::x_dependent(
            m.dim(), [m, cutoff](const Point& x, const Point& eta, const Point& xi) { return cutoff(eta, xi) * m(x, eta, xi); },
            ball);
    }
    return Symbol::coifman_meyer(
        m.dim(), [m, cutoff](const Point& eta, const Point& xi) { return cutoff(eta, xi) * m(eta, xi); }, false, ball);
}

CmReport cm_bound_check(const Symbol& m, int max_order, const std::vector<double>& sample_radii, int samples_per_ring) {
    if (m.x_dependent()) throw std::invalid_argument("cm_bound_check does not accept x-dependent symbols");
    if (max_order < 0 || max_order > 2) throw std::invalid_argument("max_order must be 0, 1 or 2");
    if (samples_per_ring < 1) throw std::invalid_argument("samples_per_ring must be positive");
    int d = m.dim();
    int dim = 2 * d;
    CmReport rep;
    rep.max_order = max_order;
    rep.radii = sample_radii;

    // unit directions in R^{2d}, fixed across radii
    std::vector<std::array<double, 4>> dirs;
    if (d == 1) {
        for (int k = 0; k < samples_per_ring; ++k) {
            double th = 2.0 * std::numbers::pi * (k + 0.37) / samples_per_ring;
            dirs.push_back({std::cos(th), std::sin(th), 0, 0});
        }
    } else {
        std::mt19937_64 rng(12345);
        std::normal_distribution<double> nd;
        for (int k = 0; k < samples_per_ring; ++k) {
            std::array<double, 4> v{nd(rng), nd(rng), nd(rng), nd(rng)};
            double s = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]);
            for (auto& c : v) c /= s;
            dirs.push_back(v);
        }
    }

    auto f = [&](const std::array<double, 4>& z) {
        Point eta{z[0], d == 2 ? z[1] : 0.0};
        Point xi{z[d], d == 2 ? z[3] : 0.0};
        return m(eta, xi);
    };

    for (double r : sample_radii) {
        if (!(r > 0.0)) throw std::invalid_argument("sample radii must be positive");
        std::array<double, 3> sup{0, 0, 0};
        double h = 1e-4 * (1.0 + r);
        for (const auto& u : dirs) {
            std::array<double, 4> z{};
            for (int i = 0; i < dim; ++i) z[i] = r * u[i];
            Point eta{z[0], d == 2 ? z[1] : 0.0};
            Point xi{z[d], d == 2 ? z[3] : 0.0};
            double w = std::sqrt(norm2(eta)) + std::sqrt(norm2(xi));
            sup[0] = std::max(sup[0], std::abs(f(z)));
            if (max_order >= 1) {
                for (int i = 0; i < dim; ++i) {
                    auto p = z, q = z;
                    p[i] += h;
                    q[i] -= h;
                    sup[1] = std::max(sup[1], w * std::abs((f(p) - f(q)) / (2.0 * h)));
                }
            }
            if (max_order >= 2) {
                for (int i = 0; i < dim; ++i) {
                    for (int j = i; j < dim; ++j) {
                        auto pp = z, pm = z, mp = z, mm = z;
                        pp[i] += h; pp[j] += h;
                        pm[i] += h; pm[j] -= h;
                        mp[i] -= h; mp[j] += h;
                        mm[i] -= h; mm[j] -= h;
                        cplx d2 = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h * h);
                        sup[2] = std::max(sup[2], w * w * std::abs(d2));
                    }
                }
            }
        }
        rep.sup.push_back(sup);
    }

    for (int k = 0; k <= max_order; ++k) {
        double top = 0.0;
        for (const auto& s : rep.sup) top = std::max(top, s[k]);
        std::vector<double> lx, ly;
        for (std::size_t i = 0; i < rep.radii.size(); ++i) {
            // values at roundoff level count as zero, which never indicates growth
            if (rep.sup[i][k] > 1e-10 * top && rep.sup[i][k] > 0.0) {
                lx.push_back(std::log(rep.radii[i]));
                ly.push_back(std::log(rep.sup[i][k]));
            }
        }
        rep.slope[k] = slope_fit(lx, ly);
        if (rep.slope[k] > 0.1) rep.passes = false;
    }
    return rep;
}

std::vector<std::pair<Point, Point>> support_samples(const Symbol& m, int per_axis) {
    if (per_axis < 2) throw std::invalid_argument("per_axis must be at least 2");
    int d = m.dim();
    SupportBall ball = m.bounded() ? *m.support() : SupportBall{{0, 0}, {0, 0}, 1.0};
    if (ball.radius == 0.0) ball.radius = 1.0;
    int dim = 2 * d;
    std::vector<std::pair<Point, Point>> out;
    std::size_t total = 1;
    for (int i = 0; i < dim; ++i) total *= static_cast<std::size_t>(per_axis);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::array<double, 4> u{};
        std::size_t rem = idx;
        double r2 = 0.0;
        for (int i = 0; i < dim; ++i) {
            int k = static_cast<int>(rem % per_axis);
            rem /= per_axis;
            u[i] = -1.0 + 2.0 * k / (per_axis - 1);
            r2 += u[i] * u[i];
        }
        if (r2 >= 1.0) continue;
        Point eta{ball.eta_center[0] + ball.radius * u[0], d == 2 ? ball.eta_center[1] + ball.radius * u[1] : 0.0};
        Point xi{ball.xi_center[0] + ball.radius * u[d], d == 2 ? ball.xi_center[1] + ball.radius * u[3] : 0.0};
        out.emplace_back(eta, xi);
    }
    return out;
}

}
