#pragma once
// Error types. ConfigError covers bad inputs (CLI exit status 2),
// NumericalError and its children cover failures during computation (status 3).

#include <stdexcept>
#include <string>

namespace nhl {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "numerical"; }
};

// Eigen-decomposition failed to converge.
struct ConvergenceError : NumericalError {
  using NumericalError::NumericalError;
  const char* kind() const noexcept override { return "convergence"; }
};

// Matrix too close to defective for a biorthonormal basis.
struct DefectiveError : NumericalError {
  double condition_number = 0.0;
  DefectiveError(const std::string& msg, double cond) : NumericalError(msg), condition_number(cond) {}
  const char* kind() const noexcept override { return "defective"; }
};

struct GaplessError : NumericalError {
  double min_gap = 0.0;
  GaplessError(const std::string& msg, double gap) : NumericalError(msg), min_gap(gap) {}
  const char* kind() const noexcept override { return "gapless"; }
};

struct TrackingError : NumericalError {
  double J = 0.0;
  double overlap = 0.0;
  TrackingError(const std::string& msg, double J_, double ov) : NumericalError(msg), J(J_), overlap(ov) {}
  const char* kind() const noexcept override { return "tracking"; }
};

struct StepSizeError : NumericalError {
  using NumericalError::NumericalError;
  const char* kind() const noexcept override { return "step_size"; }
};

struct FitError : NumericalError {
  double last_residual = 0.0;
  FitError(const std::string& msg, double res = 0.0) : NumericalError(msg), last_residual(res) {}
  const char* kind() const noexcept override { return "fit"; }
};

// Momentum spectra need complex amplitudes, not intensities.
struct PhaseRequiredError : NumericalError {
  using NumericalError::NumericalError;
  const char* kind() const noexcept override { return "phase_required"; }
};

}  // namespace nhl
