#pragma once

#include <stdexcept>
#include <string>

namespace bwk {

// Raised for invalid experiment/environment configuration. The CLI maps it
// to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Raised when a function is called outside its mathematical domain.
class ArgumentError : public std::invalid_argument {
 public:
  explicit ArgumentError(const std::string& what)
      : std::invalid_argument(what) {}
};

}  // namespace bwk
