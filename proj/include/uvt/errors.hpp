#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace uvt {

/// Precondition violated by a caller-supplied value (bad size, missing angle, ...).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input is well-formed but carries no usable structure (e.g. identical projections).
class DegenerateInput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A computation produced a non-finite value. `index` names the offending
/// parameter or element when there is one, -1 otherwise.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, std::ptrdiff_t index = -1)
        : std::runtime_error(what), index_(index) {}

    [[nodiscard]] std::ptrdiff_t index() const noexcept { return index_; }

private:
    std::ptrdiff_t index_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace uvt
