#pragma once

#include <stdexcept>
#include <string>

namespace hypctrl {

/// Machine-readable failure categories surfaced through SolverError and, by the
/// CLI, through report.json and process exit codes.
enum class ErrorCode {
  ValidationFailed,
  NonFiniteEvaluation,
  AdmissibleBallExceeded,
  NewtonDivergence,
  GridTooCoarse,
  CflViolation,
  ZeroEigenvalueUnsupported,
  DegenerateSpeed,
  DegenerateFlux,
  TimeTooShort,
  CoverageFailure,
  InconsistentObservations,
  SupercriticalEquilibrium,
  SingularBoundaryJacobian,
  IncompatibleData,
  ChartDomainExceeded,
  ConstraintViolated,
  ZeroEigenvalue,
  DomainNeverCloses,
  BadConfig,
};

const char* to_string(ErrorCode code) noexcept;

class SolverError : public std::runtime_error {
 public:
  SolverError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// True for failures of the problem statement itself (bad data, bad config),
/// as opposed to runtime solver breakdowns.
bool is_validation_error(ErrorCode code) noexcept;

}  // namespace hypctrl
