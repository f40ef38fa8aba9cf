#pragma once

#include <stdexcept>
#include <string>

namespace mar {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes do not conform (non-square input, mismatched series, ...).
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Argument outside its documented domain (row index, bandwidth, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Coefficient pair that cannot be normalized, e.g. ||A||_F = 0.
class DegenerateCoefficientError : public Error {
public:
    using Error::Error;
};

/// Coefficients violate rho(A) rho(B) < 1.
class StationarityError : public Error {
public:
    using Error::Error;
};

/// Rank-deficient or badly conditioned least-squares system.
class IllPosedRegressionError : public Error {
public:
    IllPosedRegressionError(const std::string& what, double condition)
        : Error(what), condition_(condition) {}
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

/// Penalty selection could not produce a usable value.
class TuningError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration or flag combination.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed input file. `line` is 1-based, 0 when not applicable.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace mar
