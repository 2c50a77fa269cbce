#pragma once

#include <stdexcept>
#include <string>

namespace dmbpp {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Design matrix whose Gram matrix XᵀX is not invertible.
class RankError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every mixture component assigns zero density to some observation.
class DegenerateAllocation : public std::runtime_error {
 public:
  DegenerateAllocation(std::size_t observation, const std::string& what)
      : std::runtime_error(what), observation_(observation) {}
  std::size_t observation() const { return observation_; }

 private:
  std::size_t observation_;
};

/// Malformed configuration; the message names the offending key path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two density grids that do not share the same x and y points.
class GridMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace dmbpp
