#include "oscint/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>

namespace oscint {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Plans are built once per shape and reused through the new-array execute
// interface, which FFTW documents as thread safe.
fftw_plan get_plan(int d, std::size_t n, int sign) {
    static std::mutex mtx;
    static std::map<std::tuple<int, std::size_t, int>, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_tuple(d, n, sign);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::size_t total = d == 1 ? n : n * n;
    fftw_complex* buf = fftw_alloc_complex(total);
    fftw_plan p = d == 1 ? fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED)
                         : fftw_plan_dft_2d(static_cast<int>(n), static_cast<int>(n), buf, buf, sign,
                                            FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (!p) throw std::runtime_error("fftw plan creation failed");
    cache.emplace(key, p);
    return p;
}

void execute(std::vector<cplx>& data, int d, std::size_t n, int sign) {
    fftw_plan p = get_plan(d, n, sign);
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(p, ptr, ptr);
}

// (-1)^(sum of indices) checkerboard
inline double checker(const GridSpec& g, std::size_t flat) {
    std::size_t s = g.d == 1 ? flat : flat / g.n + flat % g.n;
    return (s & 1) ? -1.0 : 1.0;
}

void require_same_grid(const SampledField& a, const SampledField& b) {
    if (!(a.grid == b.grid) || a.space != b.space) throw std::invalid_argument("field grid/space mismatch");
}

}

GridSpec::GridSpec(int d_, std::size_t n_, double L) : d(d_), n(n_), half_width(L) {
    if (d != 1 && d != 2) throw std::invalid_argument("grid dimension must be 1 or 2");
    if (n < 8 || !is_pow2(n)) throw std::invalid_argument("grid size must be a power of two >= 8");
    if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("grid half width must be positive");
}

double GridSpec::freq_spacing() const { return kPi / half_width; }
double GridSpec::freq_extent() const { return kPi * static_cast<double>(n) / (2.0 * half_width); }

double GridSpec::xi(std::size_t k) const {
    return (static_cast<double>(k) - static_cast<double>(n / 2)) * freq_spacing();
}

Point GridSpec::point(std::size_t flat, Space s) const {
    if (d == 1) return {coord(flat, s), 0.0};
    return {coord(flat / n, s), coord(flat % n, s)};
}

double GridSpec::cell(Space s) const {
    double h = s == Space::Physical ? spacing() : freq_spacing();
    return d == 1 ? h : h * h;
}

SampledField::SampledField(const GridSpec& g, Space s) : grid(g), values(g.size(), cplx(0.0)), space(s) {}

SampledField::SampledField(const GridSpec& g, Space s, std::vector<cplx> v) : grid(g), values(std::move(v)), space(s) {
    if (values.size() != grid.size()) throw std::invalid_argument("field length does not match grid");
}

SampledField& SampledField::operator+=(const SampledField& o) {
    require_same_grid(*this, o);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
}

SampledField& SampledField::operator-=(const SampledField& o) {
    require_same_grid(*this, o);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
    return *this;
}

SampledField& SampledField::operator*=(cplx s) {
    for (auto& v : values) v *= s;
    return *this;
}

SampledField operator+(SampledField a, const SampledField& b) { return a += b; }
SampledField operator-(SampledField a, const SampledField& b) { return a -= b; }
SampledField operator*(cplx s, SampledField a) { return a *= s; }

SampledField forward_transform(const SampledField& f) {
    if (f.space != Space::Physical) throw std::invalid_argument("forward_transform expects a physical-space field");
    const GridSpec& g = f.grid;
    std::vector<cplx> data(f.values);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] *= checker(g, i);
    execute(data, g.d, g.n, FFTW_FORWARD);
    double scale = g.cell(Space::Physical) / std::pow(2.0 * kPi, 0.5 * g.d);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] *= scale * checker(g, i);
    return SampledField(g, Space::Frequency, std::move(data));
}

SampledField inverse_transform(const SampledField& F) {
    if (F.space != Space::Frequency) throw std::invalid_argument("inverse_transform expects a frequency-space field");
    const GridSpec& g = F.grid;
    std::vector<cplx> data(F.values);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] *= checker(g, i);
    execute(data, g.d, g.n, FFTW_BACKWARD);
    double scale = g.cell(Space::Frequency) / std::pow(2.0 * kPi, 0.5 * g.d);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] *= scale * checker(g, i);
    return SampledField(g, Space::Physical, std::move(data));
}

double lp_norm(const SampledField& f, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm requires p >= 1");
    if (std::isinf(p)) return max_abs(f);
    double cell = f.grid.cell(f.space);
    double s = 0.0;
    if (p == 2.0) {
        for (const auto& v : f.values) s += std::norm(v);
        return std::sqrt(s * cell);
    }
    if (p == 1.0) {
        for (const auto& v : f.values) s += std::abs(v);
        return s * cell;
    }
    for (const auto& v : f.values) s += std::pow(std::abs(v), p);
    return std::pow(s * cell, 1.0 / p);
}

double weighted_lp_norm(const SampledField& f, double p, double a) {
    if (a < 0.0) throw std::invalid_argument("weight power must be nonnegative");
    if (a == 0.0) return lp_norm(f, p);
    SampledField w = f;
    for (std::size_t i = 0; i < w.size(); ++i) {
        Point x = f.grid.point(i, f.space);
        w.values[i] *= std::pow(1.0 + norm2(x), 0.5 * a);
    }
    return lp_norm(w, p);
}

double relative_l2_error(const SampledField& a, const SampledField& b) {
    require_same_grid(a, b);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a.values[i] - b.values[i]);
        den += std::norm(b.values[i]);
    }
    if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::sqrt(num / den);
}

double max_abs(const SampledField& f) {
    double m = 0.0;
    for (const auto& v : f.values) m = std::max(m, std::abs(v));
    return m;
}

Dispersion laplacian_dispersion(double c) {
    return [c](const Point& xi) { return c * norm2(xi); };
}

SampledField apply_multiplier(const SampledField& f, const std::function<cplx(const Point&)>& mult) {
    bool phys = f.space == Space::Physical;
    SampledField F = phys ? forward_transform(f) : f;
    for (std::size_t k = 0; k < F.size(); ++k) F.values[k] *= mult(F.grid.point(k, Space::Frequency));
    return phys ? inverse_transform(F) : F;
}

SampledField free_propagator(const SampledField& f, double t, const Dispersion& P) {
    if (t == 0.0) return f;
    return apply_multiplier(f, [&](const Point& xi) { return std::polar(1.0, -t * P(xi)); });
}

SampledField free_propagator(const SampledField& f, double t) {
    return free_propagator(f, t, laplacian_dispersion());
}

SampledField sample(const GridSpec& g, Space s, const std::function<cplx(const Point&)>& fn) {
    SampledField out(g, s);
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = fn(g.point(i, s));
    return out;
}

SampledField gaussian(const GridSpec& g, double sigma, Point center) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian width must be positive");
    if (g.d == 1) center[1] = 0.0;
    return sample(g, Space::Physical, [&](const Point& x) {
        return cplx(std::exp(-norm2(x - center) / (2.0 * sigma * sigma)), 0.0);
    });
}

SampledField random_bandlimited(const GridSpec& g, std::uint64_t seed, double band) {
    if (!(band > 0.0 && band <= 1.0)) throw std::invalid_argument("band fraction must lie in (0,1]");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    SampledField F(g, Space::Frequency);
    double cut = band * g.freq_extent();
    for (std::size_t k = 0; k < F.size(); ++k) {
        double re = nd(rng), im = nd(rng);
        Point xi = g.point(k, Space::Frequency);
        if (std::abs(xi[0]) < cut && std::abs(xi[1]) < cut) F.values[k] = cplx(re, im);
    }
    return inverse_transform(F);
}

SampledField make_power_decay_hat(double mu, const GridSpec& g) {
    if (!(mu > 0.0)) throw std::invalid_argument("power decay exponent must be positive");
    return sample(g, Space::Frequency, [&](const Point& xi) { return cplx(std::pow(1.0 + norm2(xi), -0.5 * mu), 0.0); });
}

cplx inverse_at(const SampledField& F, const Point& x) {
    if (F.space != Space::Frequency) throw std::invalid_argument("inverse_at expects a frequency-space field");
    cplx acc(0.0);
    for (std::size_t k = 0; k < F.size(); ++k) acc += std::polar(1.0, dot(x, F.grid.point(k, Space::Frequency))) * F.values[k];
    return acc * F.grid.cell(Space::Frequency) / std::pow(2.0 * kPi, 0.5 * F.grid.d);
}

SampledField translate(const SampledField& f, const Point& y) {
    return apply_multiplier(f, [&](const Point& xi) { return std::polar(1.0, -dot(xi, y)); });
}

}
