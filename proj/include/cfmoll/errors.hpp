#pragma once

#include <stdexcept>
#include <string>

namespace cfmoll {

/// Bad input: malformed spec, dimension mismatch, violated precondition.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A computation ran but produced a result that breaks a numerical contract
/// (normalization window, negativity tolerance, non-Hermitian quadrature).
class NumericFailure : public std::runtime_error {
public:
    explicit NumericFailure(const std::string& what) : std::runtime_error(what) {}
};

} // namespace cfmoll
