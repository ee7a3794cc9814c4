#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "atucker/errors.hpp"
#include "atucker/kernels.hpp"
#include "atucker/linalg.hpp"
#include "atucker/tensor.hpp"

namespace atucker {

/// Ground-truth generator for exact-rank recovery tests: a seeded random core
/// of shape `ranks` expanded through seeded orthonormal factors, so the result
/// has multilinear rank at most `ranks`.
inline DenseTensor synth_lowrank(const std::vector<std::size_t>& dims,
                                 const std::vector<std::size_t>& ranks, std::uint64_t seed) {
    if (dims.size() != ranks.size())
        throw ShapeMismatch("synth_lowrank dims and ranks differ in length");
    for (std::size_t n = 0; n < dims.size(); ++n) {
        if (ranks[n] < 1 || ranks[n] > dims[n])
            throw RankExceedsDim("rank " + std::to_string(ranks[n]) + " invalid for dimension " +
                                 std::to_string(dims[n]) + " at mode " + std::to_string(n));
    }
    DenseTensor x = random_tensor(ranks, detail::mix_seed(seed, 0), Distribution::StandardNormal);
    for (std::size_t n = 0; n < dims.size(); ++n) {
        DenseMatrix g(dims[n], ranks[n]);
        std::mt19937_64 rng(detail::mix_seed(seed, n + 1));
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] = gauss(rng);
        x = kernels::ttm(x, linalg::thin_qr(g).q, n);
    }
    return x;
}

}  // namespace atucker
