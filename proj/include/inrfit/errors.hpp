#pragma once

#include <stdexcept>
#include <string>

namespace inrfit {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Dimension mismatch between operands; message names the offending shapes.
struct ShapeError : Error {
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// Invalid configuration value (hyperparameters, CLI flags, builder options).
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Invalid data (out-of-range synthesis parameters, inconsistent datasets).
struct DataError : Error {
    explicit DataError(const std::string& msg) : Error(msg) {}
};

// Malformed external file; message carries the field or byte offset.
struct FormatError : DataError {
    explicit FormatError(const std::string& msg) : DataError(msg) {}
};

// Non-finite loss during training; carries the epoch where it happened.
struct DivergedError : Error {
    int epoch;
    DivergedError(const std::string& msg, int epoch_) : Error(msg), epoch(epoch_) {}
};

// Degenerate inputs to a numeric routine (zero-norm basis, empty IoU union,
// non-finite objective in finite differences).
struct MathError : Error {
    explicit MathError(const std::string& msg) : Error(msg) {}
};

} // namespace inrfit
