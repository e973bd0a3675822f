#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lqs {

/// Malformed scenario, unknown preset or invalid CLI input.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A computed artifact did not pass its oracle check.
class VerificationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The requested pattern, schedule or program cannot be realized.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Sequential linear solve hit linearly dependent rows at `step` (1-based set index).
class LiConditionError : public InfeasibleError {
public:
    LiConditionError(std::size_t step, std::size_t rank, const std::string& what)
        : InfeasibleError(what), step_(step), rank_(rank)
    {
    }
    std::size_t step() const noexcept { return step_; }
    std::size_t rank() const noexcept { return rank_; }

private:
    std::size_t step_;
    std::size_t rank_;
};

} // namespace lqs
