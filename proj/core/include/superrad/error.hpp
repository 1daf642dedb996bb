#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace superrad {

/// Bad user-supplied parameter (nonpositive counts, odd totals, p outside [0,1], ...).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Special function or kernel evaluated outside its domain (s <= 0, coincident atoms).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Problem size above a configured cap (O(N^3) sums, the N <= 8 master equation).
class TooLarge : public std::length_error {
public:
    using std::length_error::length_error;
};

/// A numerical self-consistency check failed (imaginary residue, invariant breach,
/// eigensolver failure, degenerate fit).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace superrad
