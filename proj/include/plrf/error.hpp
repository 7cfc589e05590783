#pragma once

#include <stdexcept>
#include <string>

namespace plrf {

// Bad user input: parameters outside a documented domain, malformed config.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical routine failed to produce a trustworthy answer.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace plrf
