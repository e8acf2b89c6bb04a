#pragma once

#include <stdexcept>
#include <string>

namespace vcprobe {

// Process exit codes used by the CLI.
enum class ExitCode : int {
    Success = 0,
    Config = 2,
    Runtime = 3,
    Adapter = 4,
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual ExitCode exit_code() const noexcept { return ExitCode::Runtime; }
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// Finite-difference stencil straddles the n = h/2 branch point of the bound curve.
class BranchBoundaryError : public DomainError {
public:
    using DomainError::DomainError;
};

// A numerically computed constant collapsed to a non-positive value.
class DegeneracyError : public Error {
public:
    using Error::Error;
};

// Requested confidence level lies below the floor of the bound.
class UnreachableTargetError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::Config; }
};

class ParseError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// External classifier misbehaved: bad reply, nonzero exit, or timeout.
class AdapterError : public Error {
public:
    AdapterError(const std::string& what, std::string diagnostics = {})
        : Error(what), diagnostics_(std::move(diagnostics)) {}
    const std::string& diagnostics() const noexcept { return diagnostics_; }
    ExitCode exit_code() const noexcept override { return ExitCode::Adapter; }

private:
    std::string diagnostics_;
};

// Wraps a failure inside one simulation job, keeping the (design point, repetition) index.
class SimulationError : public Error {
public:
    SimulationError(const std::string& what, std::size_t point, std::size_t rep, ExitCode code)
        : Error(what), point_(point), rep_(rep), code_(code) {}
    std::size_t point_index() const noexcept { return point_; }
    std::size_t repetition() const noexcept { return rep_; }
    ExitCode exit_code() const noexcept override { return code_; }

private:
    std::size_t point_;
    std::size_t rep_;
    ExitCode code_;
};

}  // namespace vcprobe
