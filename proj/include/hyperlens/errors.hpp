#pragma once

#include <stdexcept>
#include <string>

namespace hyperlens {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed arguments: dimension mismatches, non-finite values, curvatures
// or parameters outside their documented range.
class InvalidInputError : public Error {
public:
    using Error::Error;
};

// Structurally valid inputs that are numerically unusable: zero-norm vectors,
// all-identical samples, non-timelike centroid means, empty child masks.
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

// Bad generator or run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Filesystem-level failures: missing blobs, unreadable or unwritable paths.
class IoError : public Error {
public:
    using Error::Error;
};

// Manifest/blob disagreement, truncated payloads, corrupt values.
class FormatError : public Error {
public:
    using Error::Error;
};

// Not enough scenes or points for the requested analysis.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

} // namespace hyperlens
