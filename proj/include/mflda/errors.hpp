#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace mflda {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside the domain of an operation (e.g. polar angle at the origin).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// State became NaN/inf during time stepping.
class NumericalBlowupError : public Error {
 public:
  NumericalBlowupError(const std::string& what, std::uint64_t step,
                       std::size_t particle = npos)
      : Error(what), step_(step), particle_(particle) {}

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::uint64_t step() const noexcept { return step_; }
  /// Offending particle slot, or npos for single-trajectory integration.
  std::size_t particle() const noexcept { return particle_; }

 private:
  std::uint64_t step_;
  std::size_t particle_;
};

/// The Poincare return map did not settle within the allowed number of hits.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double previous_hit, double last_hit)
      : Error(what), previous_(previous_hit), last_(last_hit) {}

  double previous_hit() const noexcept { return previous_; }
  double last_hit() const noexcept { return last_; }

 private:
  double previous_;
  double last_;
};

/// A path turns too far between two consecutive samples to count windings.
class AliasingError : public Error {
 public:
  using Error::Error;
};

/// A query point lies outside the neighborhood where the nearest-point
/// projection onto the cycle is trusted.
class NeighborhoodError : public Error {
 public:
  using Error::Error;
};

}  // namespace mflda
