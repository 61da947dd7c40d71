#pragma once
#include <Eigen/Dense>
#include <array>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "oscint/spectral.hpp"

namespace oscint {

// phi(eta, xi). The Hessian is ordered (eta, xi), size 2d x 2d.
class Phase {
public:
    enum class Kind { Scalar, Quadratic, Callable };
    using ValueFn = std::function<double(const Point&, const Point&)>;
    using HessFn = std::function<Eigen::MatrixXd(const Point&, const Point&)>;

    // a|eta|^2 + b eta.xi + c|xi|^2
    static Phase scalar(double a, double b, double c, int d = 1);
    // eta.A eta + eta.B xi + xi.C xi with A, C symmetric
    static Phase quadratic(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& C);
    static Phase callable(int d, ValueFn value, HessFn hessian = {}, double h_fd = 1e-4);

    Kind kind() const { return kind_; }
    int dim() const { return d_; }
    bool is_scalar() const { return kind_ == Kind::Scalar; }
    bool is_quadratic() const { return kind_ != Kind::Callable; }
    double fd_step() const { return h_fd_; }
    std::array<double, 3> coefficients() const;  // (a,b,c), scalar kind only
    const Eigen::MatrixXd& A() const { return A_; }
    const Eigen::MatrixXd& B() const { return B_; }
    const Eigen::MatrixXd& C() const { return C_; }

    double operator()(const Point& eta, const Point& xi) const;
    Eigen::MatrixXd hessian(const Point& eta, const Point& xi) const;
    Eigen::MatrixXd hessian_fd(const Point& eta, const Point& xi) const;

private:
    Kind kind_ = Kind::Scalar;
    int d_ = 1;
    double a_ = 0, b_ = 0, c_ = 0;
    Eigen::MatrixXd A_, B_, C_;
    ValueFn value_;
    HessFn hess_;
    double h_fd_ = 1e-4;
};

double eval_phase(const Phase& phi, const Point& eta, const Point& xi);

struct SplitCoefficients {
    double alpha, beta, gamma;
};
// phi = alpha|eta+xi|^2 + beta|eta|^2 + gamma|xi|^2
SplitCoefficients canonical_split(const Phase& phi);

struct NondegeneracyReport {
    static constexpr std::array<const char*, 4> names{"hess", "mixed", "adj1", "adj2"};
    std::array<double, 4> min_abs_det{};
    std::array<bool, 4> degenerate{};
    std::size_t sample_count = 0;
    double tol_deg = 1e-8;
    bool all_pass() const { return !(degenerate[0] || degenerate[1] || degenerate[2] || degenerate[3]); }
};

std::array<Eigen::MatrixXd, 4> nondegeneracy_matrices(const Eigen::MatrixXd& hess, int d);
NondegeneracyReport nondegeneracy_report(const Phase& phi, const std::vector<std::pair<Point, Point>>& samples,
                                         double tol_deg = 1e-8);

// The scalar-quadratic split conditions b, 2a-b, 2c-b (all must be nonzero).
struct SplitConditions {
    std::array<double, 3> values{};
    std::array<bool, 3> vanishing{};
    bool all_pass() const { return !(vanishing[0] || vanishing[1] || vanishing[2]); }
};
SplitConditions quadratic_split_conditions(const Phase& phi, double tol = 1e-12);

// phi*1(eta,xi) = phi(eta-xi, xi), phi*2(eta,xi) = phi(eta, xi-eta)
std::pair<Phase, Phase> adjoint_phases(const Phase& phi);

}
