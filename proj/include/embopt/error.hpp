#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace embopt {

/// Malformed input: wrong lengths, non-finite values, out-of-range config.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input outside the mathematical domain of an operation (zero norms, zero baselines).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A backend answered, but with something that does not match the wire schema.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The backend could not be reached. `attempts` is how many tries were made.
class TransportError : public std::runtime_error {
 public:
  TransportError(const std::string& what, int attempts)
      : std::runtime_error(what), attempts_(attempts) {}
  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

/// An objective evaluation failed while probing one coordinate.
class ObjectiveError : public std::runtime_error {
 public:
  ObjectiveError(const std::string& what, std::size_t coordinate)
      : std::runtime_error(what), coordinate_(coordinate) {}
  std::size_t coordinate() const noexcept { return coordinate_; }

 private:
  std::size_t coordinate_;
};

}  // namespace embopt
