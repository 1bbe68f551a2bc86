#pragma once

#include <stdexcept>
#include <string>

namespace fedat {

/// Bad shapes passed to a kernel, layer, or aggregation step.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Invalid configuration value or malformed config document.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss or non-finite weights.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace fedat
