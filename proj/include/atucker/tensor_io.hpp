#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "atucker/errors.hpp"
#include "atucker/tensor.hpp"

namespace atucker {

// .dten: "DTEN" magic, u32 LE format version (= 1), u32 LE order N,
// N x u64 LE dims, then prod(dims) f64 LE payload in column-major order.

namespace detail {

inline constexpr char kDtenMagic[4] = {'D', 'T', 'E', 'N'};
inline constexpr std::uint32_t kDtenVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "the .dten reader/writer assumes a little-endian host");

template <typename T>
void write_raw(std::ofstream& out, const T* p, std::size_t count) {
    out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(count * sizeof(T)));
}

template <typename T>
bool read_raw(std::ifstream& in, T* p, std::size_t count) {
    in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(count * sizeof(T)));
    return static_cast<std::size_t>(in.gcount()) == count * sizeof(T);
}

}  // namespace detail

inline void write_dten(const std::string& path, const DenseTensor& x) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot open " + path + " for writing");
    out.write(detail::kDtenMagic, 4);
    const std::uint32_t version = detail::kDtenVersion;
    const std::uint32_t order = static_cast<std::uint32_t>(x.order());
    detail::write_raw(out, &version, 1);
    detail::write_raw(out, &order, 1);
    std::vector<std::uint64_t> dims(x.dims().begin(), x.dims().end());
    detail::write_raw(out, dims.data(), dims.size());
    detail::write_raw(out, x.data(), x.size());
    if (!out) throw IoFailure("failed writing " + path);
}

/// Stores a matrix as an order-2 .dten (rows, cols), payload column-major.
inline void write_dten(const std::string& path, const DenseMatrix& m) {
    write_dten(path, DenseTensor({m.rows(), m.cols()}, m.values()));
}

inline DenseTensor read_dten(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open " + path);

    char magic[4] = {};
    if (!detail::read_raw(in, magic, 4) || std::memcmp(magic, detail::kDtenMagic, 4) != 0)
        throw IoFailure(path + ": not a .dten file (bad magic)");
    std::uint32_t version = 0, order = 0;
    if (!detail::read_raw(in, &version, 1) || version != detail::kDtenVersion)
        throw IoFailure(path + ": unsupported .dten version " + std::to_string(version));
    if (!detail::read_raw(in, &order, 1) || order == 0)
        throw IoFailure(path + ": truncated or empty header");

    std::vector<std::uint64_t> dims64(order);
    if (!detail::read_raw(in, dims64.data(), dims64.size()))
        throw IoFailure(path + ": truncated dims block");
    std::vector<std::size_t> dims;
    std::size_t total = 1;
    for (std::uint64_t d : dims64) {
        if (d == 0) throw IoFailure(path + ": zero dimension in header");
        if (d > (std::size_t{1} << 40) / (total ? total : 1))
            throw IoFailure(path + ": dims product is implausibly large");
        dims.push_back(static_cast<std::size_t>(d));
        total *= static_cast<std::size_t>(d);
    }

    std::vector<double> data(total);
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(total * sizeof(double)));
    const std::size_t got = static_cast<std::size_t>(in.gcount());
    if (got != total * sizeof(double))
        throw IoFailure(path + ": truncated payload, expected " +
                        std::to_string(total * sizeof(double)) + " bytes but read " +
                        std::to_string(got));
    return DenseTensor(std::move(dims), std::move(data));
}

inline DenseMatrix read_dten_matrix(const std::string& path) {
    DenseTensor t = read_dten(path);
    if (t.order() != 2) throw IoFailure(path + ": expected an order-2 .dten");
    return DenseMatrix(t.dim(0), t.dim(1), t.values());
}

}  // namespace atucker
