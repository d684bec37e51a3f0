#ifndef TWINCORR_ERRORS_HPP
#define TWINCORR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace twincorr {

// Invalid specs, sizes, file contents. CLI exit code 2.
struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Request exceeds an enforced compute cap. CLI exit code 3.
struct CapError : std::runtime_error {
    explicit CapError(const std::string& what) : std::runtime_error(what) {}
};

// Unwritable output paths and friends. CLI exit code 4.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Scan argmax landed on a region edge; caller may enlarge and retry.
struct BoundaryError : std::runtime_error {
    explicit BoundaryError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace twincorr

#endif
