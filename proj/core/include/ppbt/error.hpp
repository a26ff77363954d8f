#pragma once

#include <stdexcept>
#include <string>

namespace ppbt {

/// Invalid user input (configuration, CLI arguments, domain invariants).
class ConfigError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// A numerical routine produced a non-finite or out-of-range value.
class NumericalError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

}  // namespace ppbt
