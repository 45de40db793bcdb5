#pragma once

#include <stdexcept>
#include <string>

namespace tailq {

// Error categories map onto the CLI exit-code contract (see tools/tailq.cc).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor/vector dimensions do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument to a numerical routine (bad level, bad step, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Training diverged or produced a non-finite quantity.
class TrainingError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A checkpoint, split file or scenario that a command depends on is absent.
class MissingArtifactError : public Error {
 public:
  using Error::Error;
};

/// Internal invariant broken; indicates a bug rather than bad input.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace tailq
