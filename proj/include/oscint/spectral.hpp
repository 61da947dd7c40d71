#pragma once
#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace oscint {

using cplx = std::complex<double>;
// Points live in R^d with d <= 2; unused trailing coordinates are zero.
using Point = std::array<double, 2>;

inline double dot(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm2(const Point& a) { return dot(a, a); }
inline Point operator+(const Point& a, const Point& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Point operator-(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Point operator*(double s, const Point& a) { return {s * a[0], s * a[1]}; }

enum class Space { Physical, Frequency };

struct GridSpec {
    int d = 1;
    std::size_t n = 8;
    double half_width = 1.0;

    GridSpec() = default;
    GridSpec(int d, std::size_t n, double half_width);

    double spacing() const { return 2.0 * half_width / static_cast<double>(n); }
    double freq_spacing() const;
    // frequency box is [-freq_extent, freq_extent)^d
    double freq_extent() const;
    std::size_t size() const { return d == 1 ? n : n * n; }
    double x(std::size_t j) const { return -half_width + spacing() * static_cast<double>(j); }
    double xi(std::size_t k) const;
    double coord(std::size_t j, Space s) const { return s == Space::Physical ? x(j) : xi(j); }
    Point point(std::size_t flat, Space s) const;
    double cell(Space s) const;  // spacing^d (or frequency spacing^d)

    bool operator==(const GridSpec& o) const {
        return d == o.d && n == o.n && half_width == o.half_width;
    }
};

struct SampledField {
    GridSpec grid;
    std::vector<cplx> values;
    Space space = Space::Physical;

    SampledField() = default;
    SampledField(const GridSpec& g, Space s);
    SampledField(const GridSpec& g, Space s, std::vector<cplx> v);

    std::size_t size() const { return values.size(); }
    cplx& operator[](std::size_t i) { return values[i]; }
    const cplx& operator[](std::size_t i) const { return values[i]; }

    SampledField& operator+=(const SampledField& o);
    SampledField& operator-=(const SampledField& o);
    SampledField& operator*=(cplx s);
};

SampledField operator+(SampledField a, const SampledField& b);
SampledField operator-(SampledField a, const SampledField& b);
SampledField operator*(cplx s, SampledField a);

SampledField forward_transform(const SampledField& f);
SampledField inverse_transform(const SampledField& F);

double lp_norm(const SampledField& f, double p);
double weighted_lp_norm(const SampledField& f, double p, double a);
// ||a - b||_2 / ||b||_2
double relative_l2_error(const SampledField& a, const SampledField& b);
double max_abs(const SampledField& f);

using Dispersion = std::function<double(const Point&)>;
Dispersion laplacian_dispersion(double c = 1.0);  // P(xi) = c |xi|^2

// F^{-1}[ e^{-itP(xi)} f^ ]; with P = |xi|^2 this is e^{it Laplacian} f.
SampledField free_propagator(const SampledField& f, double t, const Dispersion& P);
SampledField free_propagator(const SampledField& f, double t);

// pointwise multiplier in frequency space, input and output in the same space as f
SampledField apply_multiplier(const SampledField& f, const std::function<cplx(const Point&)>& mult);

SampledField sample(const GridSpec& g, Space s, const std::function<cplx(const Point&)>& fn);
SampledField gaussian(const GridSpec& g, double sigma = 1.0, Point center = {0.0, 0.0});
// real Gaussian noise, band-limited to |xi_i| < band * freq_extent on each axis
SampledField random_bandlimited(const GridSpec& g, std::uint64_t seed, double band = 0.5);
// frequency-space field (1+|xi|^2)^{-mu/2}
SampledField make_power_decay_hat(double mu, const GridSpec& g);

// Evaluate F^{-1}[F] at an arbitrary physical point by the same Riemann sum the
// inverse transform uses on grid points.
cplx inverse_at(const SampledField& F, const Point& x);

// translate a physical field by y via the spectral phase e^{-i xi . y}
SampledField translate(const SampledField& f, const Point& y);

}
