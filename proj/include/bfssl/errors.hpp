#pragma once

#include <stdexcept>
#include <string>

namespace bfssl {

// Invalid configuration or violated type invariant, detected at construction.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// An allocation action outside its feasible box; message names the violated bound.
struct constraint_error : std::domain_error {
    explicit constraint_error(const std::string& msg) : std::domain_error(msg) {}
};

// Degenerate, unreachable, or infeasible radio link (zero rate, zero SINR,
// or required power above p_max).
struct link_error : std::runtime_error {
    explicit link_error(const std::string& msg) : std::runtime_error(msg) {}
};

// No vehicle's upload survived the error channel this round.
struct empty_round_error : std::runtime_error {
    explicit empty_round_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Internal fault: dimension mismatch, non-finite network output, bad checkpoint.
struct internal_error : std::logic_error {
    explicit internal_error(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace bfssl
