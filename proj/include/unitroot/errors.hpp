#pragma once

#include <stdexcept>
#include <string>

namespace unitroot {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A named precondition of a named operation was violated.
class ContractError : public Error {
public:
    ContractError(std::string operation, std::string contract)
        : Error(operation + ": contract violated: " + contract),
          operation_(std::move(operation)),
          contract_(std::move(contract)) {}

    const std::string& operation() const noexcept { return operation_; }
    const std::string& contract() const noexcept { return contract_; }

private:
    std::string operation_;
    std::string contract_;
};

/// Required exponent support escapes [-W, W]. Signals the caller to enlarge
/// the window; never silently truncates.
class WindowOverflow : public Error {
public:
    WindowOverflow(std::string operation, long long needed, long long window)
        : Error(operation + ": window overflow: exponent magnitude " +
                std::to_string(needed) + " exceeds window " + std::to_string(window)),
          operation_(std::move(operation)),
          needed_(needed),
          window_(window) {}

    const std::string& operation() const noexcept { return operation_; }
    long long needed() const noexcept { return needed_; }
    long long window() const noexcept { return window_; }

private:
    std::string operation_;
    long long needed_;
    long long window_;
};

/// Malformed or inconsistent input file / literal.
class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& what) : Error("schema: " + what) {}
};

/// An iteration failed to stabilize within its budget.
class NonConvergence : public Error {
public:
    NonConvergence(std::string operation, std::string detail)
        : Error(operation + ": did not converge: " + detail),
          operation_(std::move(operation)),
          detail_(std::move(detail)) {}

    const std::string& operation() const noexcept { return operation_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string operation_;
    std::string detail_;
};

}  // namespace unitroot
