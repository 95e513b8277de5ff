#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace smc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejected input: bad surface parameters, grid too small, malformed file.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Induced metric is (numerically) singular at some grid point.
class DegenerateImmersion : public Error {
 public:
  DegenerateImmersion(std::size_t index, double det)
      : Error("degenerate immersion at grid index " + std::to_string(index) +
              " (det g = " + std::to_string(det) + ")"),
        index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// No normal frame can be seeded: |H| vanishes everywhere.
class FrameDegeneracy : public Error {
 public:
  using Error::Error;
};

/// Operation not defined for this intrinsic dimension.
class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};

/// Sphere product radius reaches zero before the requested time.
class CollapseError : public Error {
 public:
  CollapseError(double collapse_time, double requested)
      : Error("requested time " + std::to_string(requested) +
              " is at or beyond the collapse time " + std::to_string(collapse_time)),
        collapse_time_(collapse_time) {}
  double collapse_time() const noexcept { return collapse_time_; }

 private:
  double collapse_time_;
};

/// Time integration aborted (blow-up, NaN, self-intersection, vacuum, ...).
/// `time()` is the last time at which the state was still valid.
class NumericalAbort : public Error {
 public:
  NumericalAbort(const std::string& what, double time)
      : Error(what + " (t = " + std::to_string(time) + ")"), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace smc
