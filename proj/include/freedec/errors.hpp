#pragma once

#include <stdexcept>
#include <string>

namespace freedec {

// Bad arguments, malformed files, violated preconditions.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// An iterative method failed. `index` names the offending item when there is one.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what, long index = -1)
        : std::runtime_error(what), index_(index) {}
    long index() const noexcept { return index_; }

private:
    long index_;
};

}  // namespace freedec
