#pragma once

#include <stdexcept>
#include <string>

namespace nearq {

/// Invalid user-supplied parameters (bad topology, malformed schedule, unknown config key).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Vector or matrix sizes that do not agree.
class DimensionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by the iteration engine when the divergence guard fires.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string &what, std::size_t iteration)
        : std::runtime_error(what), iteration_(iteration) {}

    std::size_t iteration() const noexcept { return iteration_; }

private:
    std::size_t iteration_;
};

}    // namespace nearq
