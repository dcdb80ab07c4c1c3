#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace fasamp {

using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

// Lower bound applied to every variance that ends up in a denominator.
inline constexpr double kVarianceFloor = 1e-12;

struct Degrees {
  double value = 0.0;
};

struct Radians {
  double value = 0.0;
};

inline constexpr Radians to_radians(Degrees d) { return {d.value * std::numbers::pi / 180.0}; }
inline constexpr Degrees to_degrees(Radians r) { return {r.value * 180.0 / std::numbers::pi}; }

/// Out-of-domain scalar argument (e.g. non-positive distance or variance).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Non-conforming matrix or vector shapes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid or unknown configuration entries.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One row of a per-iteration solver trace.
struct TraceEntry {
  int iteration = 0;
  double residual = 0.0;  // ||x_t+1 - x_t||^2 / ||x_t||^2
  double nmse = 0.0;      // NaN when no ground truth was supplied
};

/// Raised when a message-passing iteration produces a non-finite value.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int iteration, const std::string& what)
      : std::runtime_error("diverged at iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}

  int iteration() const noexcept { return iteration_; }
  const std::vector<TraceEntry>& trace() const noexcept { return trace_; }
  void set_trace(std::vector<TraceEntry> trace) { trace_ = std::move(trace); }

 private:
  int iteration_;
  std::vector<TraceEntry> trace_;
};

/// Arithmetic work tallies, in complex multiply-accumulate units.
struct OpCounter {
  std::uint64_t amp_core = 0;
  std::uint64_t em = 0;
  std::uint64_t refine = 0;
  std::uint64_t somp = 0;
};

}  // namespace fasamp
