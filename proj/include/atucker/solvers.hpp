#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "atucker/errors.hpp"
#include "atucker/kernels.hpp"
#include "atucker/linalg.hpp"
#include "atucker/solver_kind.hpp"
#include "atucker/tensor.hpp"

namespace atucker {

struct AlsOptions {
    int num_iters = 5;     // fixed iteration count when rel_tol == 0
    double rel_tol = 0.0;  // relative change in L that stops early; 0 disables
    std::uint64_t seed = 0;
};

/// Output of one per-mode solve: the mode's factor (orthonormal columns) and
/// the work tensor shrunk along that mode.
struct ModeResult {
    DenseMatrix factor;
    DenseTensor shrunk;
    int iterations_run = 0;
    SolverKind solver_used = SolverKind::Eig;
};

namespace detail {

inline void check_truncation(const DenseTensor& y, std::size_t mode, std::size_t r) {
    check_mode(y, mode);
    if (r < 1 || r > y.dim(mode))
        throw RankExceedsDim("truncation " + std::to_string(r) + " invalid for mode " +
                             std::to_string(mode) + " of dimension " +
                             std::to_string(y.dim(mode)));
}

inline DenseMatrix transposed(const DenseMatrix& m) {
    DenseMatrix t(m.cols(), m.rows());
    for (std::size_t j = 0; j < m.cols(); ++j)
        for (std::size_t i = 0; i < m.rows(); ++i) t(j, i) = m(i, j);
    return t;
}

inline double rel_change(const DenseMatrix& next, const DenseMatrix& prev) {
    double diff = 0.0, base = 0.0;
    for (std::size_t i = 0; i < prev.size(); ++i) {
        const double d = next.data()[i] - prev.data()[i];
        diff += d * d;
        base += prev.data()[i] * prev.data()[i];
    }
    return base > 0.0 ? std::sqrt(diff / base) : 0.0;
}

}  // namespace detail

/// Gram-eigendecomposition solver: factor = leading R_n eigenvectors of
/// X_(n) X_(n)^T, shrunk = X x_n factor^T.
inline ModeResult eig_mode_solver(const DenseTensor& y, std::size_t mode, std::size_t r) {
    detail::check_truncation(y, mode, r);
    const DenseMatrix s = kernels::gram(y, mode);
    linalg::EigPair eig = linalg::sym_eig_top_r(s, r);
    ModeResult out;
    out.shrunk = kernels::ttm(y, detail::transposed(eig.vectors), mode);
    out.factor = std::move(eig.vectors);
    out.solver_used = SolverKind::Eig;
    return out;
}

/// Observer invoked once per completed ALS iteration with the current L and
/// the tensorized R factor; used by tests to track the fit objective.
using AlsObserver = std::function<void(const DenseMatrix&, const DenseTensor&)>;

struct AlsIterateResult {
    DenseMatrix l;      // I_n x R_n, final left factor (not orthonormalized)
    DenseTensor rfac;   // mode-n dim R_n; its mode-n unfolding is R^T
    int iterations_run = 0;
};

/// Alternating least squares for Y_(n) ~ L R^T. Both tensor-sized products
/// run through the matricization-free kernels; the R x R normal equations are
/// solved via Cholesky instead of an explicit inverse.
inline AlsIterateResult als_iterate(const DenseTensor& y, std::size_t mode, DenseMatrix l0,
                                    const AlsOptions& opts, const AlsObserver& observer = {}) {
    detail::check_mode(y, mode);
    if (l0.rows() != y.dim(mode))
        throw ShapeMismatch("initial guess has " + std::to_string(l0.rows()) +
                            " rows but mode has dimension " + std::to_string(y.dim(mode)));
    if (opts.num_iters < 1) throw Error("num_iters must be at least 1");
    const std::size_t r = l0.cols();
    const DenseMatrix eye = DenseMatrix::identity(r);

    AlsIterateResult out;
    out.l = std::move(l0);
    for (int k = 0; k < opts.num_iters; ++k) {
        // R_k^T = (L^T L)^{-1} L^T Y_(n), held as a tensor shrunk along `mode`.
        DenseTensor w = kernels::ttm(y, detail::transposed(out.l), mode);
        DenseMatrix gl = linalg::gemm(out.l, out.l, true, false);
        out.rfac = kernels::ttm(w, linalg::spd_solve(gl, eye), mode);

        // L := Y_(n) R_k (R_k^T R_k)^{-1}
        DenseMatrix yr = kernels::ttt_mode(y, out.rfac, mode);
        DenseMatrix gr = kernels::ttt_mode(out.rfac, out.rfac, mode);
        DenseMatrix next = linalg::gemm(yr, linalg::spd_solve(gr, eye));

        out.iterations_run = k + 1;
        const double change = detail::rel_change(next, out.l);
        out.l = std::move(next);
        if (observer) observer(out.l, out.rfac);
        if (opts.rel_tol > 0.0 && change <= opts.rel_tol) break;
    }
    return out;
}

/// ALS solver: run als_iterate from a seeded standard-normal initial guess,
/// orthonormalize L by thin QR and push R-hat into the shrunk tensor.
inline ModeResult als_mode_solver(const DenseTensor& y, std::size_t mode, std::size_t r,
                                  const AlsOptions& opts, const AlsObserver& observer = {}) {
    detail::check_truncation(y, mode, r);
    DenseMatrix l0(y.dim(mode), r);
    std::mt19937_64 rng(atucker::detail::mix_seed(opts.seed, mode));
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t i = 0; i < l0.size(); ++i) l0.data()[i] = gauss(rng);

    AlsIterateResult it = als_iterate(y, mode, std::move(l0), opts, observer);
    linalg::QrPair qr = linalg::thin_qr(it.l);
    ModeResult out;
    out.shrunk = kernels::ttm(it.rfac, qr.r, mode);
    out.factor = std::move(qr.q);
    out.iterations_run = it.iterations_run;
    out.solver_used = SolverKind::Als;
    return out;
}

/// Truncated-SVD reference solver; works on the explicit unfolding by design
/// and serves as the accuracy oracle for the other two.
inline ModeResult svd_mode_solver(const DenseTensor& y, std::size_t mode, std::size_t r) {
    detail::check_truncation(y, mode, r);
    const DenseMatrix m = matricize(y, mode);
    if (r > std::min(m.rows(), m.cols()))
        throw RankTooLarge("truncation exceeds the rank bound of the unfolding");
    linalg::SvdResult svd = linalg::thin_svd(m);

    ModeResult out;
    out.factor = DenseMatrix(m.rows(), r);
    for (std::size_t j = 0; j < r; ++j)
        for (std::size_t i = 0; i < m.rows(); ++i) out.factor(i, j) = svd.u(i, j);

    DenseMatrix b(r, m.cols());
    for (std::size_t jc = 0; jc < m.cols(); ++jc)
        for (std::size_t i = 0; i < r; ++i) b(i, jc) = svd.sigma[i] * svd.vt(i, jc);
    std::vector<std::size_t> dims = y.dims();
    dims[mode] = r;
    out.shrunk = tensorize(b, std::move(dims), mode);
    out.solver_used = SolverKind::Svd;
    return out;
}

}  // namespace atucker
