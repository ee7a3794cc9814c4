#pragma once

#include <stdexcept>
#include <string>

namespace atucker {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ModeOutOfRange : Error { using Error::Error; };
struct ShapeMismatch : Error { using Error::Error; };
struct RankExceedsDim : Error { using Error::Error; };
struct NotSquare : Error { using Error::Error; };
struct RankTooLarge : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct RankDeficient : Error { using Error::Error; };
struct NotSPD : Error { using Error::Error; };
struct ZeroNormInput : Error { using Error::Error; };
struct EmptyDataset : Error { using Error::Error; };
struct FeatureVersionMismatch : Error { using Error::Error; };
struct SchemaMismatch : Error { using Error::Error; };
struct IoFailure : Error { using Error::Error; };

}  // namespace atucker
