#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace opcalc {

/// Base of every error the library raises. The CLI maps all of these to exit 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (e.g. n = 0).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A series could not reach the requested tolerance inside its term cap.
class TruncationError : public Error {
public:
    using Error::Error;
};

/// A solution denominator vanishes at one or more mode indices.
class AdmissibilityError : public Error {
public:
    AdmissibilityError(const std::string& what, std::vector<std::int64_t> offending)
        : Error(what), offending_(std::move(offending)) {}

    const std::vector<std::int64_t>& offending() const noexcept { return offending_; }

private:
    std::vector<std::int64_t> offending_;
};

/// Quadrature did not converge to the requested accuracy.
class QuadratureError : public Error {
public:
    using Error::Error;
};

/// An improper integral does not decay on the integration path.
class DivergenceError : public Error {
public:
    using Error::Error;
};

/// The reflected symbol vanishes (or is singular) on the integration path.
class SingularPathError : public Error {
public:
    SingularPathError(const std::string& what, double location)
        : Error(what), location_(location) {}

    double location() const noexcept { return location_; }

private:
    double location_;
};

/// Requested inverse-Laplace pair is not in the table.
class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// The frequency-domain reduction cannot select a unique regular solution.
class SingularReductionError : public Error {
public:
    using Error::Error;
};

}  // namespace opcalc
