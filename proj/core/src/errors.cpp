#include "hypctrl/errors.hpp"

namespace hypctrl {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::NonFiniteEvaluation: return "NonFiniteEvaluation";
    case ErrorCode::AdmissibleBallExceeded: return "AdmissibleBallExceeded";
    case ErrorCode::NewtonDivergence: return "NewtonDivergence";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::CflViolation: return "CflViolation";
    case ErrorCode::ZeroEigenvalueUnsupported: return "ZeroEigenvalueUnsupported";
    case ErrorCode::DegenerateSpeed: return "DegenerateSpeed";
    case ErrorCode::DegenerateFlux: return "DegenerateFlux";
    case ErrorCode::TimeTooShort: return "TimeTooShort";
    case ErrorCode::CoverageFailure: return "CoverageFailure";
    case ErrorCode::InconsistentObservations: return "InconsistentObservations";
    case ErrorCode::SupercriticalEquilibrium: return "SupercriticalEquilibrium";
    case ErrorCode::SingularBoundaryJacobian: return "SingularBoundaryJacobian";
    case ErrorCode::IncompatibleData: return "IncompatibleData";
    case ErrorCode::ChartDomainExceeded: return "ChartDomainExceeded";
    case ErrorCode::ConstraintViolated: return "ConstraintViolated";
    case ErrorCode::ZeroEigenvalue: return "ZeroEigenvalue";
    case ErrorCode::DomainNeverCloses: return "DomainNeverCloses";
    case ErrorCode::BadConfig: return "BadConfig";
  }
  return "UnknownError";
}

bool is_validation_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ValidationFailed:
    case ErrorCode::GridTooCoarse:
    case ErrorCode::SupercriticalEquilibrium:
    case ErrorCode::IncompatibleData:
    case ErrorCode::ChartDomainExceeded:
    case ErrorCode::ConstraintViolated:
    case ErrorCode::BadConfig:
      return true;
    default:
      return false;
  }
}

}  // namespace hypctrl
