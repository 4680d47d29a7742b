#pragma once

#include <stdexcept>
#include <string>

namespace radlab {

/// Invalid configuration: bad system parameters, malformed config files,
/// out-of-contract arguments. CLI maps this to exit code 1.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: power-iteration non-convergence, Newton divergence,
/// inverse iteration stalls, node-count explosions. CLI maps this to exit 2.
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace radlab
