#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace prema {

// Base for every error raised by the library. Callers that only care about
// "something went wrong in prema" can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on an argument was violated (non-positive sizes, non-finite
// values, empty inputs, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// An integer argument fell outside its representable domain.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Vector/matrix dimensions do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A serialized artifact (model file, CSV) is malformed. `offset()` is a byte
// offset for binary formats and a 1-based line number for text formats.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Tu <= Tl: the transient rose in a single sample, so di/dt is undefined.
class DegenerateTransientError : public Error {
 public:
  using Error::Error;
};

// No sample inside the frame crossed the 10% level; the valve did not actuate.
class NoActuationError : public Error {
 public:
  using Error::Error;
};

class TrainingDivergedError : public Error {
 public:
  explicit TrainingDivergedError(std::size_t epoch)
      : Error("training diverged: non-finite loss in epoch " +
              std::to_string(epoch)),
        epoch_(epoch) {}

  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

}  // namespace prema
