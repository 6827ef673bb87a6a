#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace nbs {

/// Short form of a floating-point value for error messages.
inline std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Base for every failure raised by the library. CLI maps these to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Parameter outside its admitted range (eta^2 >= 1, m < 1, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Truncation cannot satisfy the tail tolerance below the hard cap.
class CapExceeded : public Error {
public:
    using Error::Error;
};

class NotNormalized : public Error {
public:
    using Error::Error;
};

// Ratios such as Q or g2 requested for a state with (numerically) no photons.
class Degenerate : public Error {
public:
    using Error::Error;
};

class IntegrationFailure : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace nbs
