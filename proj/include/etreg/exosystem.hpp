#ifndef ETREG_EXOSYSTEM_HPP
#define ETREG_EXOSYSTEM_HPP

#include "etreg/linalg.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace etreg {

inline constexpr double kNeutralStabilityTolerance = 1e-9;

/// True iff every eigenvalue of S lies on the imaginary axis (to tolerance)
/// and S is semi-simple: for every cluster of numerically equal eigenvalues
/// the geometric multiplicity matches the algebraic one.
inline bool check_neutral_stability(const Mat& S, double tol = kNeutralStabilityTolerance) {
    if (S.rows() != S.cols() || S.rows() == 0) return false;
    const Eigen::VectorXcd eig = linalg::eigenvalues(S);
    for (const auto& lambda : eig) {
        if (std::abs(lambda.real()) >= tol) return false;
    }

    // Defective eigenvalues split by O(sqrt(eps)) under perturbation, so the
    // clustering radius has to be generous.
    constexpr double kCluster = 1e-6;
    const auto n = S.rows();
    const double scale = std::max(1.0, linalg::spectral_norm(S));
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (used[static_cast<std::size_t>(i)]) continue;
        std::complex<double> centre = eig(i);
        Eigen::Index multiplicity = 0;
        for (Eigen::Index j = i; j < n; ++j) {
            if (!used[static_cast<std::size_t>(j)] && std::abs(eig(j) - eig(i)) < kCluster * scale) {
                used[static_cast<std::size_t>(j)] = true;
                ++multiplicity;
            }
        }
        const Eigen::MatrixXcd shifted =
            S.cast<std::complex<double>>() - centre * Eigen::MatrixXcd::Identity(n, n);
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(shifted);
        const auto& sv = svd.singularValues();
        Eigen::Index nullity = 0;
        for (Eigen::Index k = 0; k < sv.size(); ++k) {
            if (sv(k) < 1e-7 * scale) ++nullity;
        }
        if (nullity != multiplicity) return false;
    }
    return true;
}

/// Leader system dv/dt = S v, evaluated in closed form rather than integrated.
class Exosystem {
public:
    Exosystem(Mat S, Vec v0) : S_(std::move(S)), v0_(std::move(v0)) {
        if (S_.rows() != S_.cols() || S_.rows() != v0_.size() || S_.rows() == 0) {
            throw std::invalid_argument("exosystem matrix and initial state dimensions disagree");
        }
        if (S_.rows() == 2 && S_(0, 0) == 0.0 && S_(1, 1) == 0.0 && S_(0, 1) == -S_(1, 0)) {
            omega_ = S_(0, 1);
            rotation_ = true;
        }
    }

    const Mat& S() const noexcept { return S_; }
    const Vec& v0() const noexcept { return v0_; }
    Eigen::Index dim() const noexcept { return S_.rows(); }

    /// v(t) = exp(S t) v0.
    Vec propagate(double t) const { return propagate_from(v0_, t); }

    /// exp(S t) v, for an arbitrary starting point.
    Vec propagate_from(const Vec& v, double t) const {
        if (t == 0.0) return v;
        if (rotation_) {
            const double c = std::cos(omega_ * t);
            const double s = std::sin(omega_ * t);
            Vec out(2);
            out << c * v(0) + s * v(1), -s * v(0) + c * v(1);
            return out;
        }
        return linalg::expm(S_ * t) * v;
    }

private:
    Mat S_;
    Vec v0_;
    double omega_ = 0.0;
    bool rotation_ = false;
};

}  // namespace etreg

#endif  // ETREG_EXOSYSTEM_HPP
