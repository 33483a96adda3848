#ifndef REGLAB_NUMERICS_HPP
#define REGLAB_NUMERICS_HPP

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace reglab {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RealMat = Eigen::MatrixXd;
using RealVec = Eigen::VectorXd;
using Index = Eigen::Index;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularMatrix : Error {
    using Error::Error;
};
struct NoConvergence : Error {
    using Error::Error;
};
struct RankZero : Error {
    using Error::Error;
};
struct InvalidArgument : Error {
    using Error::Error;
};

inline bool all_finite(const Mat& m) { return m.allFinite(); }

inline void require_finite(const Mat& m, const char* what) {
    if (!m.allFinite()) throw InvalidArgument(std::string(what) + ": entries must be finite");
}

inline Mat hermitian_part(const Mat& m) { return 0.5 * (m + m.adjoint()); }

/// Extreme eigenvalues of a Hermitian matrix (input is symmetrized first).
inline double max_hermitian_eig(const Mat& m) {
    if (m.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(m), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NoConvergence("max_hermitian_eig: eigensolver failed");
    return es.eigenvalues().maxCoeff();
}

inline double min_hermitian_eig(const Mat& m) {
    if (m.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(m), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NoConvergence("min_hermitian_eig: eigensolver failed");
    return es.eigenvalues().minCoeff();
}

namespace detail {

// Pivot magnitude below this multiple of the largest entry declares singularity.
// Resolvent evaluation relies on it to detect spectrum hits.
constexpr double kPivotRelTol = 1e-14;

inline double singular_pivot_threshold(const Mat& a) {
    const double amax = a.cwiseAbs().maxCoeff();
    return kPivotRelTol * (amax > 0.0 ? amax : 1.0);
}

}  // namespace detail

/// Reusable partial-pivot LU factorization. Throws SingularMatrix on
/// construction when a pivot falls below 1e-14 * max|A|.
class LinearSolver {
public:
    explicit LinearSolver(const Mat& a) : lu_(a), n_(a.rows()) {
        if (a.rows() != a.cols()) throw InvalidArgument("LinearSolver: matrix must be square");
        const double thresh = detail::singular_pivot_threshold(a);
        min_pivot_ = n_ > 0 ? lu_.matrixLU().diagonal().cwiseAbs().minCoeff() : 1.0;
        if (n_ > 0 && min_pivot_ < thresh)
            throw SingularMatrix("LinearSolver: pivot " + std::to_string(min_pivot_) +
                                 " below threshold " + std::to_string(thresh));
    }

    Mat solve(const Mat& rhs) const {
        if (rhs.rows() != n_) throw InvalidArgument("LinearSolver: RHS row count mismatch");
        return lu_.solve(rhs);
    }

    Mat solve_adjoint(const Mat& rhs) const { return lu_.adjoint().solve(rhs); }

    double min_pivot() const { return min_pivot_; }

private:
    Eigen::PartialPivLU<Mat> lu_;
    Index n_;
    double min_pivot_ = 0.0;
};

/// X with A*X = RHS. Throws SingularMatrix when A is numerically singular.
inline Mat solve_linear(const Mat& a, const Mat& rhs) {
    return LinearSolver(a).solve(rhs);
}

/// Eigenvalues of a square complex matrix, with multiplicity.
inline Vec spectrum(const Mat& a) {
    if (a.rows() != a.cols()) throw InvalidArgument("spectrum: matrix must be square");
    if (a.rows() == 0) return Vec(0);
    Eigen::ComplexEigenSolver<Mat> es(a, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw NoConvergence("spectrum: QR iteration did not converge");
    return es.eigenvalues();
}

/// Singular values in decreasing order. BDC for larger matrices, Jacobi below.
inline RealVec singular_values(const Mat& a) {
    if (a.rows() == 0 || a.cols() == 0) return RealVec(0);
    if (a.rows() <= 32 && a.cols() <= 32) {
        Eigen::JacobiSVD<Mat> svd(a);
        return svd.singularValues();
    }
    Eigen::BDCSVD<Mat> svd(a);
    if (svd.info() != Eigen::Success) throw NoConvergence("singular_values: SVD failed");
    return svd.singularValues();
}

inline double min_singular_value(const Mat& a) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    const RealVec sv = singular_values(a);
    return sv(sv.size() - 1);
}

/// Spectral norm (largest singular value).
inline double operator_norm(const Mat& a) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    return singular_values(a)(0);
}

/// Norm of the Moore-Penrose pseudoinverse: 1/sigma for the smallest singular
/// value above `cutoff`. Throws RankZero when every singular value is below.
inline double pseudoinverse_norm(const Mat& a, double cutoff = 0.0) {
    if (cutoff < 0.0) throw InvalidArgument("pseudoinverse_norm: cutoff must be >= 0");
    const RealVec sv = singular_values(a);
    for (Index i = sv.size() - 1; i >= 0; --i) {
        if (sv(i) > cutoff) return 1.0 / sv(i);
    }
    throw RankZero("pseudoinverse_norm: all singular values at or below cutoff");
}

/// Numerical rank against a relative tolerance on the largest singular value.
inline Index numerical_rank(const Mat& a, double rel_tol = 1e-10) {
    if (a.rows() == 0 || a.cols() == 0) return 0;
    const RealVec sv = singular_values(a);
    const double thresh = rel_tol * (sv(0) > 0.0 ? sv(0) : 1.0);
    Index r = 0;
    while (r < sv.size() && sv(r) > thresh) ++r;
    return r;
}

}  // namespace reglab

#endif  // REGLAB_NUMERICS_HPP
