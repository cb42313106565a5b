#pragma once

#include <stdexcept>
#include <string>

namespace gkdv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid grid parameters or mismatched grids.
class GridError : public Error {
 public:
  using Error::Error;
};

/// A precondition on the input data is violated (tail wrap, safe region, radius).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed to converge or produced an invalid result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The evolution blew up or left its conservation budget; carries the time of failure.
class EvolutionError : public NumericalError {
 public:
  EvolutionError(const std::string& what, double t) : NumericalError(what), time_(t) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Malformed or out-of-range configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Bad snapshot or cache file.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace gkdv
