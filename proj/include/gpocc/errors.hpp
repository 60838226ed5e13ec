#pragma once

#include <stdexcept>
#include <string>

namespace gpocc {

/// A caller broke a documented precondition.
class ContractViolation : public std::logic_error {
public:
    explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

/// A numerical routine failed after its built-in recovery attempts
/// (e.g. Cholesky factorization after jitter escalation). The message
/// carries the conditioning diagnostics.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// File parsing / schema mismatch.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gpocc
