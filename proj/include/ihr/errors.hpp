#pragma once

#include <stdexcept>

namespace ihr {

struct ShapeMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotPositiveDefinite : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionOverflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonFiniteLoss : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyDataset : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct VersionMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CorruptFile : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FactorMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ZeroAdjustedUpdate : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidConfig : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DivergedRun : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace ihr
