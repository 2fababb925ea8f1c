#pragma once

#include <stdexcept>
#include <string>

namespace phonobus {

// Base for every failure the library reports. Each subclass carries a
// process exit code so the CLI can map failures without RTTI chains.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what, int exit_code = 1)
        : std::runtime_error(what), exit_code_(exit_code) {}
    int exit_code() const noexcept { return exit_code_; }

private:
    int exit_code_;
};

// Violated parameter invariant; `key()` is the offending config key path.
class ValidationError : public Error {
public:
    ValidationError(std::string key, const std::string& message)
        : Error(key + ": " + message, 2), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

// A dispersive (second-order) formula was evaluated too close to a resonance.
class NearResonanceError : public Error {
public:
    explicit NearResonanceError(const std::string& what) : Error(what, 3) {}
};

class NoConvergenceError : public Error {
public:
    explicit NoConvergenceError(const std::string& what) : Error(what, 4) {}
};

class IntegratorError : public Error {
public:
    explicit IntegratorError(const std::string& what) : Error(what, 5) {}
};

class StepSizeUnderflow : public IntegratorError {
public:
    using IntegratorError::IntegratorError;
};

class TraceDrift : public IntegratorError {
public:
    using IntegratorError::IntegratorError;
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(what, 2) {}
};

}  // namespace phonobus
