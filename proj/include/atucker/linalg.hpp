#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "atucker/errors.hpp"
#include "atucker/instrumentation.hpp"
#include "atucker/tensor.hpp"

namespace atucker::linalg {

namespace detail {

inline Eigen::Map<const Eigen::MatrixXd> map_of(const DenseMatrix& m) {
    return {m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}

inline Eigen::Map<Eigen::MatrixXd> map_of(DenseMatrix& m) {
    return {m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}

inline DenseMatrix from_eigen(const Eigen::MatrixXd& e) {
    DenseMatrix m(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
    map_of(m) = e;
    return m;
}

/// Flip column signs so the entry of largest magnitude (first such on ties)
/// in each column of `v` is positive. `coupled`, when present, is flipped
/// with it (right singular vectors track their left partners).
inline void fix_signs(Eigen::Ref<Eigen::MatrixXd> v, Eigen::Ref<Eigen::MatrixXd>* coupled = nullptr) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
        Eigen::Index best = 0;
        double mag = 0.0;
        for (Eigen::Index i = 0; i < v.rows(); ++i) {
            const double a = std::abs(v(i, j));
            if (a > mag) {
                mag = a;
                best = i;
            }
        }
        if (v(best, j) < 0.0) {
            v.col(j) = -v.col(j);
            if (coupled) coupled->col(j) = -coupled->col(j);
        }
    }
}

}  // namespace detail

/// Eigenpairs of a symmetric matrix: values descending, one orthonormal
/// column per value.
struct EigPair {
    std::vector<double> values;
    DenseMatrix vectors;
};

/// Thin QR: q has orthonormal columns, r is upper triangular with a
/// nonnegative diagonal.
struct QrPair {
    DenseMatrix q;
    DenseMatrix r;
};

struct SvdResult {
    DenseMatrix u;
    std::vector<double> sigma;
    DenseMatrix vt;
};

/// C = op(A) * op(B). Counts one GEMM call and 2*m*n*k flops.
inline DenseMatrix gemm(const DenseMatrix& a, const DenseMatrix& b, bool trans_a = false,
                        bool trans_b = false) {
    const std::size_t m = trans_a ? a.cols() : a.rows();
    const std::size_t k = trans_a ? a.rows() : a.cols();
    const std::size_t kb = trans_b ? b.cols() : b.rows();
    const std::size_t n = trans_b ? b.rows() : b.cols();
    if (k != kb) throw ShapeMismatch("gemm inner dimensions disagree");
    DenseMatrix c(m, n);
    auto A = detail::map_of(a);
    auto B = detail::map_of(b);
    auto C = detail::map_of(c);
    if (!trans_a && !trans_b)
        C.noalias() = A * B;
    else if (trans_a && !trans_b)
        C.noalias() = A.transpose() * B;
    else if (!trans_a && trans_b)
        C.noalias() = A * B.transpose();
    else
        C.noalias() = A.transpose() * B.transpose();
    instr::record_gemm(2LL * static_cast<long long>(m) * static_cast<long long>(n) *
                       static_cast<long long>(k));
    return c;
}

/// Top-r eigenpairs of a symmetric matrix, values descending. The input is
/// symmetrized as (S + S^T)/2 before factorization.
inline EigPair sym_eig_top_r(const DenseMatrix& s, std::size_t r) {
    if (s.rows() != s.cols()) throw NotSquare("sym_eig_top_r expects a square matrix");
    const std::size_t n = s.rows();
    if (r < 1 || r > n) throw RankTooLarge("requested " + std::to_string(r) + " eigenpairs of a " +
                                           std::to_string(n) + "x" + std::to_string(n) + " matrix");
    auto S = detail::map_of(s);
    Eigen::MatrixXd sym = 0.5 * (S + S.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success) throw NoConvergence("symmetric eigendecomposition failed");

    // Eigen returns values ascending; keep the top r in descending order.
    EigPair out;
    out.values.resize(r);
    out.vectors = DenseMatrix(n, r);
    auto v = detail::map_of(out.vectors);
    for (std::size_t j = 0; j < r; ++j) {
        const Eigen::Index src = static_cast<Eigen::Index>(n - 1 - j);
        out.values[j] = solver.eigenvalues()(src);
        v.col(static_cast<Eigen::Index>(j)) = solver.eigenvectors().col(src);
    }
    detail::fix_signs(v);
    return out;
}

/// Thin Householder QR of a full-column-rank I x R matrix (I >= R).
inline QrPair thin_qr(const DenseMatrix& a) {
    if (a.rows() < a.cols()) throw ShapeMismatch("thin_qr expects rows >= cols");
    const std::size_t rows = a.rows();
    const std::size_t cols = a.cols();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(detail::map_of(a));
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(
                                                static_cast<Eigen::Index>(rows),
                                                static_cast<Eigen::Index>(cols));
    Eigen::MatrixXd r = qr.matrixQR()
                            .topRows(static_cast<Eigen::Index>(cols))
                            .triangularView<Eigen::Upper>();
    for (Eigen::Index k = 0; k < r.rows(); ++k) {
        if (r(k, k) < 0.0) {
            r.row(k) = -r.row(k);
            q.col(k) = -q.col(k);
        }
    }
    const double floor = 1e-12 * frobenius_norm(a);
    for (Eigen::Index k = 0; k < r.rows(); ++k) {
        if (std::abs(r(k, k)) < floor)
            throw RankDeficient("QR diagonal " + std::to_string(k) + " below tolerance");
    }
    return {detail::from_eigen(q), detail::from_eigen(r)};
}

/// Thin SVD with sigma descending and the sign convention of sym_eig_top_r
/// applied to each left singular vector.
inline SvdResult thin_svd(const DenseMatrix& a) {
    if (a.size() == 0) throw ShapeMismatch("thin_svd expects a nonempty matrix");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(detail::map_of(a), Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw NoConvergence("singular value decomposition failed");
    Eigen::MatrixXd u = svd.matrixU();
    Eigen::MatrixXd v = svd.matrixV();
    Eigen::Ref<Eigen::MatrixXd> vref = v;
    detail::fix_signs(u, &vref);
    SvdResult out;
    out.u = detail::from_eigen(u);
    out.sigma.assign(svd.singularValues().data(), svd.singularValues().data() + svd.singularValues().size());
    out.vt = detail::from_eigen(v.transpose());
    return out;
}

/// Solves A X = B for symmetric positive definite A via Cholesky.
inline DenseMatrix spd_solve(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != a.cols()) throw NotSquare("spd_solve expects a square matrix");
    if (a.rows() != b.rows()) throw ShapeMismatch("spd_solve right-hand side has wrong row count");
    Eigen::LLT<Eigen::MatrixXd> llt(detail::map_of(a));
    if (llt.info() != Eigen::Success) throw NotSPD("Cholesky factorization hit a non-positive pivot");
    DenseMatrix x(b.rows(), b.cols());
    detail::map_of(x) = llt.solve(detail::map_of(b));
    return x;
}

}  // namespace atucker::linalg
