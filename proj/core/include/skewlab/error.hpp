#pragma once

#include <stdexcept>
#include <string>

namespace skewlab {

/// Input violates a mathematical precondition (non-unimodular matrix,
/// non-commuting pair, points off a common leaf, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A constructed object failed a numerical validity check.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The request is outside the supported instance class.
class UnsupportedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure did not reach its certified accuracy.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The computation finished but the outcome is tolerance-dependent.
class InconclusiveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace skewlab
