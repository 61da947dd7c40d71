#include "oscint/phase.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace oscint {

namespace {

Eigen::MatrixXd sym(const Eigen::MatrixXd& M) { return 0.5 * (M + M.transpose()); }

// Linear change of variables (eta, xi) -> M (eta, xi) for the adjoint phases.
Eigen::MatrixXd adjoint_map(int d, int which) {
    Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(2 * d, 2 * d);
    if (which == 1)
        M.block(0, d, d, d) = -I;  // eta - xi
    else
        M.block(d, 0, d, d) = -I;  // xi - eta
    return M;
}

}

Phase Phase::scalar(double a, double b, double c, int d) {
    if (d != 1 && d != 2) throw std::invalid_argument("phase dimension must be 1 or 2");
    Phase p;
    p.kind_ = Kind::Scalar;
    p.d_ = d;
    p.a_ = a;
    p.b_ = b;
    p.c_ = c;
    Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
    p.A_ = a * I;
    p.B_ = b * I;
    p.C_ = c * I;
    return p;
}

Phase Phase::quadratic(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& C) {
    int d = static_cast<int>(A.rows());
    if (d != 1 && d != 2) throw std::invalid_argument("phase dimension must be 1 or 2");
    for (const auto* M : {&A, &B, &C})
        if (M->rows() != d || M->cols() != d) throw std::invalid_argument("quadratic phase blocks must be d x d");
    double scale = 1.0 + A.cwiseAbs().maxCoeff() + C.cwiseAbs().maxCoeff();
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale ||
        (C - C.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("quadratic phase blocks A and C must be symmetric");
    Phase p;
    p.kind_ = Kind::Quadratic;
    p.d_ = d;
    p.A_ = A;
    p.B_ = B;
    p.C_ = C;
    return p;
}

Phase Phase::callable(int d, ValueFn value, HessFn hessian, double h_fd) {
    if (d != 1 && d != 2) throw std::invalid_argument("phase dimension must be 1 or 2");
    if (!value) throw std::invalid_argument("callable phase needs a value function");
    if (!(h_fd > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
    Phase p;
    p.kind_ = Kind::Callable;
    p.d_ = d;
    p.value_ = std::move(value);
    p.hess_ = std::move(hessian);
    p.h_fd_ = h_fd;
    return p;
}

std::array<double, 3> Phase::coefficients() const {
    if (kind_ != Kind::Scalar) throw std::invalid_argument("phase is not a scalar quadratic");
    return {a_, b_, c_};
}

double Phase::operator()(const Point& eta, const Point& xi) const {
    switch (kind_) {
        case Kind::Scalar:
            return a_ * norm2(eta) + b_ * dot(eta, xi) + c_ * norm2(xi);
        case Kind::Quadratic: {
            double s = 0.0;
            for (int i = 0; i < d_; ++i)
                for (int j = 0; j < d_; ++j)
                    s += eta[i] * A_(i, j) * eta[j] + eta[i] * B_(i, j) * xi[j] + xi[i] * C_(i, j) * xi[j];
            return s;
        }
        case Kind::Callable:
            return value_(eta, xi);
    }
    return 0.0;
}

Eigen::MatrixXd Phase::hessian(const Point& eta, const Point& xi) const {
    if (kind_ == Kind::Callable) {
        if (hess_) return hess_(eta, xi);
        return hessian_fd(eta, xi);
    }
    Eigen::MatrixXd H(2 * d_, 2 * d_);
    H.block(0, 0, d_, d_) = 2.0 * A_;
    H.block(0, d_, d_, d_) = B_;
    H.block(d_, 0, d_, d_) = B_.transpose();
    H.block(d_, d_, d_, d_) = 2.0 * C_;
    return H;
}

Eigen::MatrixXd Phase::hessian_fd(const Point& eta, const Point& xi) const {
    int m = 2 * d_;
    Eigen::VectorXd z(m);
    for (int i = 0; i < d_; ++i) {
        z[i] = eta[i];
        z[d_ + i] = xi[i];
    }
    double h = h_fd_ * (1.0 + z.norm());
    auto f = [&](const Eigen::VectorXd& w) {
        Point e{0, 0}, x{0, 0};
        for (int i = 0; i < d_; ++i) {
            e[i] = w[i];
            x[i] = w[d_ + i];
        }
        return (*this)(e, x);
    };
    Eigen::MatrixXd H(m, m);
    for (int i = 0; i < m; ++i) {
        for (int j = i; j < m; ++j) {
            Eigen::VectorXd pp = z, pm = z, mp = z, mm = z;
            pp[i] += h; pp[j] += h;
            pm[i] += h; pm[j] -= h;
            mp[i] -= h; mp[j] += h;
            mm[i] -= h; mm[j] -= h;
            H(i, j) = H(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h * h);
        }
    }
    return H;
}

double eval_phase(const Phase& phi, const Point& eta, const Point& xi) { return phi(eta, xi); }

SplitCoefficients canonical_split(const Phase& phi) {
    auto [a, b, c] = phi.coefficients();
    return {b / 2.0, a - b / 2.0, c - b / 2.0};
}

std::array<Eigen::MatrixXd, 4> nondegeneracy_matrices(const Eigen::MatrixXd& H, int d) {
    Eigen::MatrixXd Hee = H.block(0, 0, d, d);
    Eigen::MatrixXd Hex = H.block(0, d, d, d);  // d_eta_i d_xi_j
    Eigen::MatrixXd Hxe = H.block(d, 0, d, d);
    Eigen::MatrixXd Hxx = H.block(d, d, d, d);
    return {H,
            Hxe - Hxx,                           // d_xi (d_eta - d_xi)
            2.0 * Hex - 2.0 * Hee - Hxx + Hxe,   // (2 d_eta - d_xi)(d_xi - d_eta)
            Hex - 2.0 * Hxx};                    // (d_eta - 2 d_xi) d_xi
}

NondegeneracyReport nondegeneracy_report(const Phase& phi, const std::vector<std::pair<Point, Point>>& samples,
                                         double tol_deg) {
    if (samples.empty()) throw std::invalid_argument("nondegeneracy_report needs at least one sample");
    NondegeneracyReport rep;
    rep.tol_deg = tol_deg;
    rep.sample_count = samples.size();
    rep.min_abs_det.fill(std::numeric_limits<double>::infinity());
    for (const auto& [eta, xi] : samples) {
        Eigen::MatrixXd H = phi.hessian(eta, xi);
        if (!H.allFinite()) throw std::runtime_error("phase Hessian evaluation produced non-finite values");
        auto mats = nondegeneracy_matrices(H, phi.dim());
        for (int k = 0; k < 4; ++k) rep.min_abs_det[k] = std::min(rep.min_abs_det[k], std::abs(mats[k].determinant()));
    }
    for (int k = 0; k < 4; ++k) rep.degenerate[k] = rep.min_abs_det[k] < tol_deg;
    return rep;
}

SplitConditions quadratic_split_conditions(const Phase& phi, double tol) {
    auto [a, b, c] = phi.coefficients();
    SplitConditions s;
    s.values = {b, 2 * a - b, 2 * c - b};
    for (int k = 0; k < 3; ++k) s.vanishing[k] = std::abs(s.values[k]) <= tol;
    return s;
}

std::pair<Phase, Phase> adjoint_phases(const Phase& phi) {
    int d = phi.dim();
    if (phi.kind() == Phase::Kind::Scalar) {
        auto [a, b, c] = phi.coefficients();
        return {Phase::scalar(a, b - 2 * a, a - b + c, d), Phase::scalar(a - b + c, b - 2 * c, c, d)};
    }
    if (phi.kind() == Phase::Kind::Quadratic) {
        const auto &A = phi.A(), &B = phi.B(), &C = phi.C();
        Eigen::MatrixXd sB = sym(B);
        return {Phase::quadratic(A, B - 2 * A, A + C - sB), Phase::quadratic(A - sB + C, B - 2 * C, C)};
    }
    auto make = [&](int which) {
        Eigen::MatrixXd M = adjoint_map(d, which);
        auto value = [phi, which](const Point& eta, const Point& xi) {
            return which == 1 ? phi(eta - xi, xi) : phi(eta, xi - eta);
        };
        auto hess = [phi, which, M](const Point& eta, const Point& xi) -> Eigen::MatrixXd {
            Eigen::MatrixXd H = which == 1 ? phi.hessian(eta - xi, xi) : phi.hessian(eta, xi - eta);
            return M.transpose() * H * M;
        };
        return Phase::callable(d, value, hess, phi.fd_step());
    };
    return {make(1), make(2)};
}

}
