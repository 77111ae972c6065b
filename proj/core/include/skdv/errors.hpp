#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace skdv {

// Raised when a trajectory or a solver produces non-finite or runaway values.
class NumericalFailure : public std::runtime_error {
public:
    explicit NumericalFailure(const std::string& what,
                              double last_valid_time = std::numeric_limits<double>::quiet_NaN())
        : std::runtime_error(what), last_valid_time_(last_valid_time) {}

    double last_valid_time() const noexcept { return last_valid_time_; }

private:
    double last_valid_time_;
};

// Newton or an implicit solve did not reach tolerance.
class NoConvergence : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

// A 2x2 modulation system became singular.
class SingularSystem : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace skdv
