#pragma once

#include <stdexcept>
#include <string>

namespace rank1am {

// Thrown when an integrand or prediction produces a non-finite value.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a weighted Gram matrix is numerically singular.
struct SingularSystemError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a fitting/classification window has too few usable points.
struct WindowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a ratio series has not reached a plateau.
struct NotConvergedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown on malformed configuration files or CLI arguments.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace rank1am
