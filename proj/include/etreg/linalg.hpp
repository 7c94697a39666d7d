#ifndef ETREG_LINALG_HPP
#define ETREG_LINALG_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>

namespace etreg {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;

namespace linalg {

/// Matrix exponential by scaling and squaring with a degree-13 Pade
/// approximant (Higham 2005). Backward error is at unit roundoff level for
/// any input; accuracy in practice is governed by the conditioning of exp.
inline Mat expm(const Mat& A) {
    const auto n = A.rows();
    if (n == 0) return A;
    static constexpr std::array<double, 14> b = {
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0,  129060195264000.0,   10559470521600.0,
        670442572800.0,      33522128640.0,       1323241920.0,
        40840800.0,          960960.0,            16380.0,
        182.0,               1.0};
    constexpr double theta13 = 5.371920351148152;

    const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm1 > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
    }
    const Mat As = A / std::ldexp(1.0, squarings);

    const Mat I = Mat::Identity(n, n);
    const Mat A2 = As * As;
    const Mat A4 = A2 * A2;
    const Mat A6 = A4 * A2;
    const Mat U = As * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 +
                        b[3] * A2 + b[1] * I);
    const Mat V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 +
                  b[2] * A2 + b[0] * I;
    Mat R = (V - U).partialPivLu().solve(V + U);
    for (int k = 0; k < squarings; ++k) R = R * R;
    return R;
}

/// Largest singular value (the norm induced by the Euclidean vector norm).
inline double spectral_norm(const Mat& A) {
    if (A.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(A);
    return svd.singularValues()(0);
}

/// Ratio of extreme singular values; +inf for exactly singular input.
inline double condition_number(const Mat& A) {
    Eigen::JacobiSVD<Mat> svd(A);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (smin == 0.0) return std::numeric_limits<double>::infinity();
    return sv(0) / smin;
}

/// Smallest eigenvalue of the symmetric part of A.
inline double min_symmetric_eigenvalue(const Mat& A) {
    const Mat sym = 0.5 * (A + A.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

inline Eigen::VectorXcd eigenvalues(const Mat& A) {
    Eigen::EigenSolver<Mat> es(A, false);
    return es.eigenvalues();
}

inline double max_real_part(const Mat& A) {
    return eigenvalues(A).real().maxCoeff();
}

inline double min_real_part(const Mat& A) {
    return eigenvalues(A).real().minCoeff();
}

/// Companion matrix with ones on the superdiagonal and `last_row` as its
/// final row.
inline Mat companion(std::span<const double> last_row) {
    const auto s = static_cast<Eigen::Index>(last_row.size());
    Mat C = Mat::Zero(s, s);
    for (Eigen::Index i = 0; i + 1 < s; ++i) C(i, i + 1) = 1.0;
    for (Eigen::Index j = 0; j < s; ++j) C(s - 1, j) = last_row[static_cast<std::size_t>(j)];
    return C;
}

inline Vec to_vec(std::span<const double> values) {
    Vec v(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) v(static_cast<Eigen::Index>(i)) = values[i];
    return v;
}

}  // namespace linalg
}  // namespace etreg

#endif  // ETREG_LINALG_HPP
