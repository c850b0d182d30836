#pragma once

#include <stdexcept>
#include <string>

namespace isv {

/// Raised for every recoverable failure in the library (bad input, I/O, contract violation).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace isv
