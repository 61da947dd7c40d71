#pragma once
#include <array>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "oscint/spectral.hpp"

namespace oscint {

// A ball in R^{2d} (eta, xi) that contains the support of a symbol.
struct SupportBall {
    Point eta_center{0, 0};
    Point xi_center{0, 0};
    double radius = 0.0;
};

class Symbol {
public:
    enum class Kind { Constant, SmoothBump, CoifmanMeyer, XDependent };
    using Fn = std::function<cplx(const Point& eta, const Point& xi)>;
    using XFn = std::function<cplx(const Point& x, const Point& eta, const Point& xi)>;

    static Symbol constant(cplx value, int d = 1);
    // amplitude * exp(-1/(1-|u|^2)) with u = ((eta,xi) - center)/radius
    static Symbol bump(const Point& eta_center, const Point& xi_center, double radius, double amplitude = 1.0,
                       int d = 1);
    static Symbol coifman_meyer(int d, Fn fn, bool homogeneous = false, std::optional<SupportBall> support = {});
    static Symbol x_dependent(int d, XFn fn, std::optional<SupportBall> support = {});

    Kind kind() const { return kind_; }
    int dim() const { return d_; }
    bool x_dependent() const { return kind_ == Kind::XDependent; }
    bool homogeneous() const { return homogeneous_; }
    bool is_zero() const { return kind_ == Kind::Constant && value_ == cplx(0.0); }
    cplx constant_value() const { return value_; }
    const std::optional<SupportBall>& support() const { return support_; }
    bool bounded() const { return support_.has_value(); }

    cplx operator()(const Point& eta, const Point& xi) const;
    cplx operator()(const Point& x, const Point& eta, const Point& xi) const;

private:
    Kind kind_ = Kind::Constant;
    int d_ = 1;
    cplx value_{1.0, 0.0};
    bool homogeneous_ = false;
    Fn fn_;
    XFn xfn_;
    std::optional<SupportBall> support_;
};

cplx eval_symbol(const Symbol& m, const Point& eta, const Point& xi, const Point* x = nullptr);

// exp-based C-infinity step: 0 for t <= 0, 1 for t >= 1
double smooth_step(double t);

// m times a cutoff equal to 1 on B(0,R) and 0 outside B(0,2R)
Symbol truncate_symbol(const Symbol& m, double R);

struct CmReport {
    int max_order = 2;
    std::vector<double> radii;
    // sup[i][k]: sup over ring i of (|eta|+|xi|)^k |d^k m| over all multi-indices of order k
    std::vector<std::array<double, 3>> sup;
    std::array<double, 3> slope{};
    bool passes = true;
};

CmReport cm_bound_check(const Symbol& m, int max_order, const std::vector<double>& sample_radii,
                        int samples_per_ring = 64);

// Sample points (eta, xi) covering the symbol support (or [-1,1]^{2d} if unbounded).
std::vector<std::pair<Point, Point>> support_samples(const Symbol& m, int per_axis = 9);

}
