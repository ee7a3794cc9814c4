#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "atucker/errors.hpp"
#include "atucker/instrumentation.hpp"

namespace atucker {

namespace detail {

inline std::size_t checked_product(std::span<const std::size_t> dims) {
    std::size_t p = 1;
    for (std::size_t d : dims) p *= d;
    return p;
}

inline void validate_dims(std::span<const std::size_t> dims) {
    if (dims.empty()) throw ShapeMismatch("tensor order must be at least 1");
    for (std::size_t d : dims) {
        if (d == 0) throw ShapeMismatch("tensor dimensions must be positive");
    }
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    // splitmix64 finalizer
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Dense column-major matrix of doubles. Element (i, j) lives at i + rows*j.
class DenseMatrix {
public:
    DenseMatrix() = default;

    DenseMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0), token_(rows * cols) {}

    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)), token_(data_.size()) {
        if (data_.size() != rows_ * cols_)
            throw ShapeMismatch("matrix data length does not match rows*cols");
    }

    DenseMatrix(const DenseMatrix& other)
        : rows_(other.rows_), cols_(other.cols_), data_(other.data_), token_(data_.size()) {}
    DenseMatrix& operator=(const DenseMatrix& other) {
        if (this != &other) {
            rows_ = other.rows_;
            cols_ = other.cols_;
            data_ = other.data_;
            token_.reset(data_.size());
        }
        return *this;
    }
    DenseMatrix(DenseMatrix&&) noexcept = default;
    DenseMatrix& operator=(DenseMatrix&&) noexcept = default;

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double operator()(std::size_t i, std::size_t j) const { return data_[i + rows_ * j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i + rows_ * j]; }

    const double* data() const { return data_.data(); }
    double* data() { return data_.data(); }
    const std::vector<double>& values() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
    instr::AllocToken token_;
};

/// Dense N-th order tensor of doubles in column-major layout: element
/// (i_1, ..., i_N) lives at flat index i_1 + I_1*i_2 + I_1*I_2*i_3 + ...
/// Treat instances as immutable once filled; kernels build outputs through
/// the mutable accessors and hand back value copies.
class DenseTensor {
public:
    DenseTensor() = default;

    explicit DenseTensor(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
        detail::validate_dims(dims_);
        data_.assign(detail::checked_product(dims_), 0.0);
        token_.reset(data_.size());
    }

    DenseTensor(std::vector<std::size_t> dims, std::vector<double> data)
        : dims_(std::move(dims)), data_(std::move(data)), token_(data_.size()) {
        detail::validate_dims(dims_);
        if (data_.size() != detail::checked_product(dims_))
            throw ShapeMismatch("tensor data length does not match the product of dims");
    }

    DenseTensor(const DenseTensor& other)
        : dims_(other.dims_), data_(other.data_), token_(data_.size()) {}
    DenseTensor& operator=(const DenseTensor& other) {
        if (this != &other) {
            dims_ = other.dims_;
            data_ = other.data_;
            token_.reset(data_.size());
        }
        return *this;
    }
    DenseTensor(DenseTensor&&) noexcept = default;
    DenseTensor& operator=(DenseTensor&&) noexcept = default;

    std::size_t order() const { return dims_.size(); }
    const std::vector<std::size_t>& dims() const { return dims_; }
    std::size_t dim(std::size_t mode) const { return dims_.at(mode); }
    std::size_t size() const { return data_.size(); }

    /// Flat offset of a zero-based multi-index.
    std::size_t linear_index(std::span<const std::size_t> idx) const {
        std::size_t flat = 0;
        std::size_t stride = 1;
        for (std::size_t m = 0; m < dims_.size(); ++m) {
            flat += idx[m] * stride;
            stride *= dims_[m];
        }
        return flat;
    }

    double operator[](std::size_t flat) const { return data_[flat]; }
    double& operator[](std::size_t flat) { return data_[flat]; }

    const double* data() const { return data_.data(); }
    double* data() { return data_.data(); }
    const std::vector<double>& values() const { return data_; }

private:
    std::vector<std::size_t> dims_;
    std::vector<double> data_;
    instr::AllocToken token_;
};

inline double frobenius_norm(const DenseTensor& x) {
    double s = 0.0;
    for (double v : x.values()) s += v * v;
    return std::sqrt(s);
}

inline double frobenius_norm(const DenseMatrix& m) {
    double s = 0.0;
    for (double v : m.values()) s += v * v;
    return std::sqrt(s);
}

namespace detail {

/// Sizes of the loop partition at `mode`: `inner` merges all lower modes,
/// `outer` all higher ones. The flat buffer is `outer` contiguous slabs of
/// an inner x axis column-major matrix each.
struct LoopSplit {
    std::size_t inner = 1;  // P_n = prod of dims below mode
    std::size_t axis = 1;   // I_n
    std::size_t outer = 1;  // O_n = prod of dims above mode
};

inline LoopSplit loop_split(std::span<const std::size_t> dims, std::size_t mode) {
    LoopSplit s;
    for (std::size_t m = 0; m < mode; ++m) s.inner *= dims[m];
    s.axis = dims[mode];
    for (std::size_t m = mode + 1; m < dims.size(); ++m) s.outer *= dims[m];
    return s;
}

inline void check_mode(const DenseTensor& x, std::size_t mode) {
    if (mode >= x.order())
        throw ModeOutOfRange("mode " + std::to_string(mode) + " out of range for order " +
                             std::to_string(x.order()));
}

}  // namespace detail

/// Mode-n unfolding: an I_n x J_n matrix whose column j enumerates the non-n
/// indices with lower-numbered modes varying fastest. This exists as a test
/// oracle and for the SVD reference solver; the matricization-free kernels
/// never call it.
inline DenseMatrix matricize(const DenseTensor& x, std::size_t mode) {
    detail::check_mode(x, mode);
    const auto split = detail::loop_split(x.dims(), mode);
    DenseMatrix m(split.axis, split.inner * split.outer);
    const double* src = x.data();
    double* dst = m.data();
    const std::size_t rows = split.axis;
    for (std::size_t o = 0; o < split.outer; ++o) {
        for (std::size_t a = 0; a < split.axis; ++a) {
            const double* slab = src + (o * split.axis + a) * split.inner;
            for (std::size_t p = 0; p < split.inner; ++p) {
                dst[a + rows * (o * split.inner + p)] = slab[p];
            }
        }
    }
    return m;
}

/// Inverse of matricize: folds an unfolding back into a tensor of `dims`.
inline DenseTensor tensorize(const DenseMatrix& m, std::vector<std::size_t> dims, std::size_t mode) {
    detail::validate_dims(dims);
    if (mode >= dims.size())
        throw ModeOutOfRange("mode " + std::to_string(mode) + " out of range for order " +
                             std::to_string(dims.size()));
    const auto split = detail::loop_split(dims, mode);
    if (m.rows() != split.axis || m.cols() != split.inner * split.outer)
        throw ShapeMismatch("matrix shape does not match the requested folding");
    DenseTensor x(std::move(dims));
    const double* src = m.data();
    double* dst = x.data();
    const std::size_t rows = split.axis;
    for (std::size_t o = 0; o < split.outer; ++o) {
        for (std::size_t a = 0; a < split.axis; ++a) {
            double* slab = dst + (o * split.axis + a) * split.inner;
            for (std::size_t p = 0; p < split.inner; ++p) {
                slab[p] = src[a + rows * (o * split.inner + p)];
            }
        }
    }
    return x;
}

enum class Distribution { Uniform01, StandardNormal };

/// Seed-deterministic random tensor with i.i.d. entries.
inline DenseTensor random_tensor(std::vector<std::size_t> dims, std::uint64_t seed,
                                 Distribution dist = Distribution::Uniform01) {
    DenseTensor x(std::move(dims));
    std::mt19937_64 rng(seed);
    if (dist == Distribution::Uniform01) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = u(rng);
    } else {
        std::normal_distribution<double> g(0.0, 1.0);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = g(rng);
    }
    return x;
}

}  // namespace atucker
