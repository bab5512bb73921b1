#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace relief {

/// Query outside the surface's lateral extent, or a degenerate geometric input.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A grid is too small for the requested operation.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Invalid parameters or selections (render params, ROI windows, trajectories).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// ROI window or level outside the pyramid.
class SelectionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Malformed input file. `location()` is a 1-based line for text formats and a
/// byte offset for binary ones.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t location)
      : std::runtime_error(what), location_(location) {}

  std::size_t location() const noexcept { return location_; }

 private:
  std::size_t location_;
};

}  // namespace relief
