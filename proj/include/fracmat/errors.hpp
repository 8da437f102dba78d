#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace fracmat {

/// Base class for every failure mode raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Variables of a symmetric-function evaluation are too close together for
/// the rational (partial-fraction) route.
class DegenerateVariables : public Error {
public:
    using Error::Error;
};

/// Diagonal entries of a two-band matrix are too close for eigendecomposition.
class DegenerateDiagonal : public Error {
public:
    using Error::Error;
};

/// A non-integer power was requested on a matrix with a non-positive diagonal.
class NonPositiveDiagonal : public Error {
public:
    using Error::Error;
};

/// A numerical route produced non-finite values or failed its residual check.
class NumericalBreakdown : public Error {
public:
    using Error::Error;
};

/// Samples of g are not strictly monotone in the required direction.
class NonMonotoneSamples : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature stalled before reaching the requested tolerance.
class ToleranceNotMet : public Error {
public:
    using Error::Error;
};

/// A semigroup integral over (0, inf) has a non-integrable tail.
class DivergentTail : public Error {
public:
    using Error::Error;
};

/// Expression evaluation left its mathematical domain (log of a non-positive
/// number, negative base with fractional exponent, division by zero, ...).
class EvalDomainError : public Error {
public:
    using Error::Error;
};

/// Integer computation exceeded the available integer width.
class IntegerOverflow : public Error {
public:
    using Error::Error;
};

/// Inversion target lies outside the image of the function on its interval.
class OutOfRange : public Error {
public:
    using Error::Error;
};

/// Numeric inversion of a monotone function failed to converge.
class InversionFailure : public Error {
public:
    using Error::Error;
};

/// Left-sided operators require f(a) = 0.
class NonVanishingAtA : public Error {
public:
    using Error::Error;
};

/// Right-sided operators require f(b) = 0.
class NonVanishingAtB : public Error {
public:
    using Error::Error;
};

/// The reference method of a convergence sweep did not produce a usable value.
class OracleNotConverged : public Error {
public:
    using Error::Error;
};

/// Catalog lookup with an unknown function name.
class UnknownCatalogEntry : public Error {
public:
    using Error::Error;
};

/// Expression syntax error; carries the byte offset of the offending token
/// and a description of what was expected there.
class ParseError : public Error {
public:
    ParseError(std::size_t offset, std::string expected)
        : Error("parse error at offset " + std::to_string(offset) + ": expected " + expected),
          offset_(offset),
          expected_(std::move(expected)) {}

    std::size_t offset() const { return offset_; }
    const std::string& expected() const { return expected_; }

private:
    std::size_t offset_;
    std::string expected_;
};

} // namespace fracmat
