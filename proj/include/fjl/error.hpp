#pragma once

#include <stdexcept>
#include <string>

namespace fjl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shape or length mismatch, non-power-of-two length, index out of range.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A dimension plan whose inequalities cannot be satisfied.
class PlanningError : public Error {
public:
    using Error::Error;
};

/// Brute-force enumeration would exceed its guard.
class InstanceTooLargeError : public Error {
public:
    using Error::Error;
};

/// Distortion report requested on a point set without nonzero columns.
class EmptyReportError : public Error {
public:
    using Error::Error;
};

/// Malformed or unreadable binary / CSV / JSON input.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Calibration grid exhausted without a passing candidate.
class CalibrationError : public Error {
public:
    using Error::Error;
};

}  // namespace fjl
