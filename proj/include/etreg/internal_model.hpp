#ifndef ETREG_INTERNAL_MODEL_HPP
#define ETREG_INTERNAL_MODEL_HPP

#include "etreg/errors.hpp"
#include "etreg/linalg.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace etreg {

/// P(lambda) = lambda^s - varrho_1 - varrho_2 lambda - ... - varrho_s lambda^{s-1},
/// the annihilating polynomial of the steady-state input. `varrho` is also
/// the last row of the companion matrix.
struct SteadyStatePolynomial {
    std::vector<double> varrho;

    std::size_t order() const noexcept { return varrho.size(); }
};

inline constexpr double kImaginaryRootTolerance = 1e-9;

/// Roots of P must be pairwise distinct and purely imaginary.
inline bool has_simple_imaginary_roots(const SteadyStatePolynomial& poly) {
    if (poly.order() == 0) return false;
    const Eigen::VectorXcd roots = linalg::eigenvalues(linalg::companion(poly.varrho));
    for (Eigen::Index i = 0; i < roots.size(); ++i) {
        if (std::abs(roots(i).real()) >= kImaginaryRootTolerance) return false;
        for (Eigen::Index j = i + 1; j < roots.size(); ++j) {
            if (std::abs(roots(i) - roots(j)) < 1e-6) return false;
        }
    }
    return true;
}

struct CompanionPair {
    Mat Phi;
    RowVec Gamma;
};

inline CompanionPair companion_from_polynomial(const SteadyStatePolynomial& poly) {
    if (!has_simple_imaginary_roots(poly)) {
        throw Error(ErrorKind::RootsNotSimpleImaginary,
                    "steady-state polynomial must have distinct roots on the imaginary axis");
    }
    CompanionPair pair;
    pair.Phi = linalg::companion(poly.varrho);
    pair.Gamma = RowVec::Zero(static_cast<Eigen::Index>(poly.order()));
    pair.Gamma(0) = 1.0;
    return pair;
}

/// Companion M whose characteristic polynomial is
/// lambda^s + c_{s-1} lambda^{s-1} + ... + c_0, given `coeffs` = (c_0, ..., c_{s-1}).
inline Mat companion_from_characteristic(const std::vector<double>& coeffs) {
    std::vector<double> row(coeffs.size());
    for (std::size_t k = 0; k < coeffs.size(); ++k) row[k] = -coeffs[k];
    return linalg::companion(row);
}

/// Q = (0, ..., 0, 1)^T.
inline Vec last_unit_vector(Eigen::Index s) {
    Vec q = Vec::Zero(s);
    q(s - 1) = 1.0;
    return q;
}

inline constexpr double kHurwitzTolerance = 1e-10;

/// M Hurwitz and (M, Q) controllable.
inline bool check_pair(const Mat& M, const Vec& Q) {
    const auto s = M.rows();
    if (s == 0 || M.cols() != s || Q.size() != s) return false;
    if (linalg::max_real_part(M) >= -kHurwitzTolerance) return false;
    Mat ctrb(s, s);
    Vec col = Q;
    for (Eigen::Index k = 0; k < s; ++k) {
        ctrb.col(k) = col;
        col = M * col;
    }
    Eigen::FullPivLU<Mat> lu(ctrb);
    lu.setThreshold(1e-10);
    return lu.rank() == s;
}

enum class KroneckerOrdering { ColumnMajor, RowMajor };

inline constexpr double kMaxTCondition = 1e12;

/// Solves T Phi - M T = Q Gamma through the vectorized system. With
/// column-stacking, (Phi^T (x) I - I (x) M) vec(T) = vec(Q Gamma); the
/// row-stacking variant uses (I (x) Phi^T - M (x) I).
inline Mat solve_sylvester(const Mat& Phi, const Mat& M, const Vec& Q, const RowVec& Gamma,
                           KroneckerOrdering ordering = KroneckerOrdering::ColumnMajor) {
    const auto s = Phi.rows();
    const auto m = M.rows();
    if (Phi.cols() != s || M.cols() != m || Q.size() != m || Gamma.size() != s) {
        throw std::invalid_argument("Sylvester operands have inconsistent dimensions");
    }
    const Mat rhs = Q * Gamma;  // m x s
    const auto n = m * s;
    Mat K = Mat::Zero(n, n);
    Vec b(n);
    if (ordering == KroneckerOrdering::ColumnMajor) {
        // index(i, j) = j * m + i
        for (Eigen::Index j = 0; j < s; ++j)
            for (Eigen::Index i = 0; i < m; ++i) {
                const auto row = j * m + i;
                b(row) = rhs(i, j);
                for (Eigen::Index k = 0; k < s; ++k) K(row, k * m + i) += Phi(k, j);
                for (Eigen::Index k = 0; k < m; ++k) K(row, j * m + k) -= M(i, k);
            }
    } else {
        // index(i, j) = i * s + j
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < s; ++j) {
                const auto row = i * s + j;
                b(row) = rhs(i, j);
                for (Eigen::Index k = 0; k < s; ++k) K(row, i * s + k) += Phi(k, j);
                for (Eigen::Index k = 0; k < m; ++k) K(row, k * s + j) -= M(i, k);
            }
    }
    Eigen::FullPivLU<Mat> lu(K);
    if (!lu.isInvertible() || linalg::condition_number(K) > 1e14) {
        throw Error(ErrorKind::SingularSolve, "Kronecker system of the Sylvester equation is singular");
    }
    const Vec x = lu.solve(b);
    Mat T(m, s);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < s; ++j)
            T(i, j) = ordering == KroneckerOrdering::ColumnMajor ? x(j * m + i) : x(i * s + j);
    if (T.rows() != T.cols() || linalg::condition_number(T) > kMaxTCondition) {
        throw Error(ErrorKind::SingularT, "Sylvester solution is singular or too ill-conditioned to invert");
    }
    return T;
}

inline double sylvester_residual(const Mat& T, const Mat& Phi, const Mat& M, const Vec& Q,
                                 const RowVec& Gamma) {
    return (T * Phi - M * T - Q * Gamma).norm();
}

/// Linear internal model deta/dt = M eta + Q u of one agent together with
/// the products of its synthesis.
struct InternalModel {
    Mat Phi;
    RowVec Gamma;
    Mat M;
    Vec Q;
    Mat T;
    RowVec Psi;  // Gamma T^{-1}

    Eigen::Index order() const noexcept { return M.rows(); }
};

inline InternalModel synthesize_internal_model(const SteadyStatePolynomial& poly, Mat M, Vec Q) {
    auto [Phi, Gamma] = companion_from_polynomial(poly);
    if (M.rows() != Phi.rows()) {
        throw Error(ErrorKind::InvalidPair, "internal model order must match the polynomial order");
    }
    if (!check_pair(M, Q)) {
        throw Error(ErrorKind::InvalidPair, "M must be Hurwitz and (M, Q) controllable");
    }
    InternalModel im;
    im.T = solve_sylvester(Phi, M, Q, Gamma);
    im.Psi = Gamma * im.T.inverse();
    im.Phi = std::move(Phi);
    im.Gamma = std::move(Gamma);
    im.M = std::move(M);
    im.Q = std::move(Q);
    return im;
}

/// Closed-form propagation of the compensator over an interval on which the
/// control is held:
///   eta(t_k + dt) = e^{M dt} eta_k + M^{-1} (e^{M dt} - I) Q u_k.
/// The exponentials for the most recent dt are cached, which pays off because
/// the engine mostly advances by its base step. The cache makes an instance
/// unsuitable for sharing between threads.
class EtaPropagator {
public:
    EtaPropagator(Mat M, Vec Q) : M_(std::move(M)), Q_(std::move(Q)), lu_(M_) {}

    explicit EtaPropagator(const InternalModel& im) : EtaPropagator(im.M, im.Q) {}

    Vec advance(const Vec& eta_k, double u_k, double dt) const {
        if (dt == 0.0) return eta_k;
        refresh(dt);
        return cached_exp_ * eta_k + cached_input_ * u_k;
    }

private:
    void refresh(double dt) const {
        if (cached_dt_ && *cached_dt_ == dt) return;
        cached_exp_ = linalg::expm(M_ * dt);
        const auto s = M_.rows();
        cached_input_ = lu_.solve((cached_exp_ - Mat::Identity(s, s)) * Q_);
        cached_dt_ = dt;
    }

    Mat M_;
    Vec Q_;
    Eigen::PartialPivLU<Mat> lu_;
    mutable std::optional<double> cached_dt_;
    mutable Mat cached_exp_;
    mutable Vec cached_input_;
};

inline Vec exact_eta_update(const InternalModel& im, const Vec& eta_k, double u_k, double dt) {
    if (dt < 0.0) throw std::invalid_argument("dt must be non-negative");
    return EtaPropagator(im).advance(eta_k, u_k, dt);
}

}  // namespace etreg

#endif  // ETREG_INTERNAL_MODEL_HPP
