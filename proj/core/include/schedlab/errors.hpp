#pragma once

#include <stdexcept>
#include <string>

namespace schedlab {

// Invalid configuration (bad ranges, horizon too short, mismatched dimensions).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or unreadable file content.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// A policy issued a directive the simulator cannot legally apply.
struct PolicyViolation : std::runtime_error {
    explicit PolicyViolation(const std::string& msg) : std::runtime_error(msg) {}
};

// Internal consistency failure (infeasible solution matrix, trace mismatch).
struct IntegrityError : std::runtime_error {
    explicit IntegrityError(const std::string& msg) : std::runtime_error(msg) {}
};

// Training diverged or was configured inconsistently.
struct TrainError : std::runtime_error {
    explicit TrainError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace schedlab
