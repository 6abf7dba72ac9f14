#pragma once

#include <stdexcept>
#include <string>

namespace stumpforge {

/// Input failed a precondition (malformed file, bad matrix, unknown id...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A referenced entity does not exist.
class NotFoundError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A record collides with one already stored.
class DuplicateError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// The variational fit produced a non-finite objective.
class FitDivergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No entities were detected, so the country divergence is undefined.
class DiversityUndefinedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An answerer could not produce a prediction for the perturbation probe.
class HighlightUnavailableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stumpforge
