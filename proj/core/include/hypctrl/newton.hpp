#pragma once

#include <functional>
#include <span>
#include <vector>

namespace hypctrl {

/// Residual of a small dense nonlinear system, written into `out`.
using ResidualFn = std::function<void(std::span<const double> z, std::span<double> out)>;
/// Row-major Jacobian d(residual)/dz written into `out` (size n*n).
using JacobianFn = std::function<void(std::span<const double> z, std::span<double> out)>;

struct NewtonOptions {
  double tolerance = 1e-12;  // sup-norm residual target
  int max_iterations = 50;
  double fd_step_scale = 1e-6;  // finite-difference step: scale * max(1, |z|_inf)
  int max_halvings = 30;        // damping: step halving on residual increase
};

struct NewtonResult {
  bool converged = false;
  int iterations = 0;
  double residual_norm = 0.0;
};

/// Damped Newton on F(z) = 0, z modified in place.  When `jac` is null the
/// Jacobian comes from central finite differences with the step rule above.
/// Throws SolverError(NewtonDivergence) on failure and
/// SolverError(NonFiniteEvaluation) if the residual is not finite.
NewtonResult newton_solve(std::span<double> z, const ResidualFn& residual, const JacobianFn& jac = nullptr,
                          const NewtonOptions& options = {});

/// Central finite-difference Jacobian of `residual`, step
/// fd_step_scale * max(1, |z|_inf) per coordinate; row-major n_out x n_in.
void fd_jacobian(std::span<const double> z, int n_out, const ResidualFn& residual, double fd_step_scale,
                 std::span<double> out);

/// Deterministic low-discrepancy points in the sup-norm ball |v|_inf <= radius
/// (additive-recurrence sequence).
std::vector<std::vector<double>> quasirandom_ball(int dimension, double radius, int count);

}  // namespace hypctrl
