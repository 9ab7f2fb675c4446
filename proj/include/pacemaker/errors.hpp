#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pacemaker {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridMismatchError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct KernelError : std::domain_error {
    using std::domain_error::domain_error;
};

struct InvertibilityError : std::domain_error {
    using std::domain_error::domain_error;
};

// Raised when a Fourier multiplier produces a non-negligible imaginary part.
struct SymbolParityError : std::domain_error {
    using std::domain_error::domain_error;
};

struct SolvabilityError : std::domain_error {
    SolvabilityError(const std::string& what, std::vector<double> defects_)
        : std::domain_error(what), defects(std::move(defects_)) {}
    std::vector<double> defects;
};

struct IllPosedError : std::domain_error {
    using std::domain_error::domain_error;
};

struct DegenerateBorderingError : std::domain_error {
    using std::domain_error::domain_error;
};

struct SignConditionError : std::domain_error {
    using std::domain_error::domain_error;
};

struct DivergenceError : std::runtime_error {
    DivergenceError(const std::string& what, std::vector<double> history_)
        : std::runtime_error(what), history(std::move(history_)) {}
    std::vector<double> history;
};

struct BlowupError : std::runtime_error {
    BlowupError(const std::string& what, double last_stable_time_)
        : std::runtime_error(what), last_stable_time(last_stable_time_) {}
    double last_stable_time;
};

} // namespace pacemaker
