#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <string>
#include <vector>

#include "atucker/errors.hpp"
#include "atucker/instrumentation.hpp"
#include "atucker/tensor.hpp"

namespace atucker::kernels {

namespace detail {

using atucker::detail::check_mode;
using atucker::detail::loop_split;
using atucker::detail::LoopSplit;

using CMap = Eigen::Map<const Eigen::MatrixXd>;
using MMap = Eigen::Map<Eigen::MatrixXd>;

inline CMap cmap(const double* p, std::size_t rows, std::size_t cols) {
    return {p, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}

inline MMap mmap(double* p, std::size_t rows, std::size_t cols) {
    return {p, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}

/// Z = X_(n) * Y_(n)^T computed slab-wise on the flat buffers. With
/// `half_flops` the counter charges m*n*k per slab (symmetric rank-k
/// convention used by gram); otherwise 2*m*n*k.
inline DenseMatrix ttt_impl(const DenseTensor& x, const DenseTensor& y, std::size_t mode,
                            bool half_flops) {
    check_mode(x, mode);
    check_mode(y, mode);
    if (x.order() != y.order()) throw ShapeMismatch("ttt_mode operands differ in order");
    for (std::size_t m = 0; m < x.order(); ++m) {
        if (m != mode && x.dim(m) != y.dim(m))
            throw ShapeMismatch("ttt_mode operands disagree on dimension " + std::to_string(m));
    }
    const LoopSplit sx = loop_split(x.dims(), mode);
    const std::size_t rows = sx.axis;        // I_n
    const std::size_t cols = y.dim(mode);    // R_n
    const long long charge_scale = half_flops ? 1 : 2;
    DenseMatrix z(rows, cols);
    auto Z = mmap(z.data(), rows, cols);
    if (mode == 0) {
        const std::size_t j = sx.inner * sx.outer;
        Z.noalias() = cmap(x.data(), rows, j) * cmap(y.data(), cols, j).transpose();
        instr::record_gemm(charge_scale * static_cast<long long>(rows * cols) *
                           static_cast<long long>(j));
    } else if (mode + 1 == x.order()) {
        const std::size_t p = sx.inner;
        Z.noalias() = cmap(x.data(), p, rows).transpose() * cmap(y.data(), p, cols);
        instr::record_gemm(charge_scale * static_cast<long long>(rows * cols) *
                           static_cast<long long>(p));
    } else {
        // One GEMM per outer slab, accumulated in extended precision: the
        // slab count can reach the thousands and entries like the Gram
        // diagonal grow linearly with it, so a plain running double sum
        // loses digits the single-GEMM edge modes keep.
        const std::size_t p = sx.inner;
        std::vector<long double> acc(rows * cols, 0.0L);
        Eigen::MatrixXd tmp(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (std::size_t o = 0; o < sx.outer; ++o) {
            auto xs = cmap(x.data() + o * p * rows, p, rows);
            auto ys = cmap(y.data() + o * p * cols, p, cols);
            tmp.noalias() = xs.transpose() * ys;
            const double* t = tmp.data();
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += t[i];
            instr::record_gemm(charge_scale * static_cast<long long>(rows * cols) *
                               static_cast<long long>(p));
        }
        double* zp = z.data();
        for (std::size_t i = 0; i < acc.size(); ++i) zp[i] = static_cast<double>(acc[i]);
    }
    return z;
}

}  // namespace detail

/// Mode-n tensor-times-matrix product Y = X x_n U with U of shape R x I_n.
/// The mode-n dimension is replaced by R. No unfolding is materialized:
/// the first and last modes run as a single GEMM on the reinterpreted flat
/// buffer, intermediate modes as one GEMM per outer slab.
inline DenseTensor ttm(const DenseTensor& x, const DenseMatrix& u, std::size_t mode) {
    detail::check_mode(x, mode);
    if (u.cols() != x.dim(mode))
        throw ShapeMismatch("ttm matrix has " + std::to_string(u.cols()) +
                            " columns but mode has dimension " + std::to_string(x.dim(mode)));
    const auto split = detail::loop_split(x.dims(), mode);
    const std::size_t r = u.rows();
    std::vector<std::size_t> out_dims = x.dims();
    out_dims[mode] = r;
    DenseTensor out(std::move(out_dims));
    auto U = detail::cmap(u.data(), u.rows(), u.cols());
    if (mode == 0) {
        const std::size_t j = split.inner * split.outer;
        detail::mmap(out.data(), r, j).noalias() = U * detail::cmap(x.data(), split.axis, j);
        instr::record_gemm(2LL * static_cast<long long>(r * j) * static_cast<long long>(split.axis));
    } else if (mode + 1 == x.order()) {
        const std::size_t p = split.inner;
        detail::mmap(out.data(), p, r).noalias() =
            detail::cmap(x.data(), p, split.axis) * U.transpose();
        instr::record_gemm(2LL * static_cast<long long>(r * p) * static_cast<long long>(split.axis));
    } else {
        const std::size_t p = split.inner;
        for (std::size_t o = 0; o < split.outer; ++o) {
            detail::mmap(out.data() + o * p * r, p, r).noalias() =
                detail::cmap(x.data() + o * p * split.axis, p, split.axis) * U.transpose();
            instr::record_gemm(2LL * static_cast<long long>(r * p) *
                               static_cast<long long>(split.axis));
        }
    }
    return out;
}

/// Mode-n tensor-times-tensor contraction Z = X_(n) * Y_(n)^T over all modes
/// but n, computed without forming either unfolding.
inline DenseMatrix ttt_mode(const DenseTensor& x, const DenseTensor& y, std::size_t mode) {
    return detail::ttt_impl(x, y, mode, /*half_flops=*/false);
}

/// Mode-n Gram matrix X_(n) * X_(n)^T, symmetrized as (Z + Z^T)/2.
inline DenseMatrix gram(const DenseTensor& x, std::size_t mode) {
    DenseMatrix z = detail::ttt_impl(x, x, mode, /*half_flops=*/true);
    const std::size_t n = z.rows();
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = j + 1; i < n; ++i) {
            const double v = 0.5 * (z(i, j) + z(j, i));
            z(i, j) = v;
            z(j, i) = v;
        }
    }
    return z;
}

}  // namespace atucker::kernels
