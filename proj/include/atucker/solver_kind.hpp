#pragma once

#include <string>

#include "atucker/errors.hpp"

namespace atucker {

/// Per-mode solver identity. The integer values match the label encoding of
/// the trained selector (0 = EIG, 1 = ALS); SVD is the reference path only.
enum class SolverKind { Eig = 0, Als = 1, Svd = 2 };

inline const char* to_string(SolverKind k) {
    switch (k) {
        case SolverKind::Eig: return "eig";
        case SolverKind::Als: return "als";
        case SolverKind::Svd: return "svd";
    }
    return "eig";
}

inline SolverKind solver_kind_from_string(const std::string& s) {
    if (s == "eig" || s == "EIG") return SolverKind::Eig;
    if (s == "als" || s == "ALS") return SolverKind::Als;
    if (s == "svd" || s == "SVD") return SolverKind::Svd;
    throw Error("unknown solver name: " + s);
}

}  // namespace atucker
