#pragma once

#include <stdexcept>
#include <string>

namespace sinhp {

// Error taxonomy. Exit-code mapping for the CLI: ConfigError -> 2,
// everything else numerical -> 3.

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SingularityError : std::runtime_error {
    explicit SingularityError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ResolutionError : std::runtime_error {
    explicit ResolutionError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

struct QuadratureError : std::runtime_error {
    explicit QuadratureError(const std::string& msg) : std::runtime_error(msg) {}
};

struct MassOverflowError : std::runtime_error {
    explicit MassOverflowError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IntegrityError : std::runtime_error {
    explicit IntegrityError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace sinhp
