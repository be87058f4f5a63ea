#pragma once

#include <stdexcept>

namespace momentswarm {

/// Invalid scenario or estimator configuration (e.g. gamma * d_out >= 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace momentswarm
