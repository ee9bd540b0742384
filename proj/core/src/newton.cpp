#include "hypctrl/newton.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "hypctrl/errors.hpp"

namespace hypctrl {

namespace {

double sup_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

void fd_jacobian(std::span<const double> z, int n_out, const ResidualFn& residual, double fd_step_scale,
                 std::span<double> out) {
  const int n = static_cast<int>(z.size());
  const double h = fd_step_scale * std::max(1.0, sup_norm(z));
  std::vector<double> zp(z.begin(), z.end()), zm(z.begin(), z.end());
  std::vector<double> fp(n_out), fm(n_out);
  for (int c = 0; c < n; ++c) {
    zp[c] = z[c] + h;
    zm[c] = z[c] - h;
    residual(zp, fp);
    residual(zm, fm);
    for (int r = 0; r < n_out; ++r) out[static_cast<size_t>(r) * n + c] = (fp[r] - fm[r]) / (2.0 * h);
    zp[c] = z[c];
    zm[c] = z[c];
  }
}

NewtonResult newton_solve(std::span<double> z, const ResidualFn& residual, const JacobianFn& jac,
                          const NewtonOptions& options) {
  const int n = static_cast<int>(z.size());
  std::vector<double> f(n), jbuf(static_cast<size_t>(n) * n), trial(n), ftrial(n);

  residual(z, f);
  if (!all_finite(f)) throw SolverError(ErrorCode::NonFiniteEvaluation, "residual not finite at Newton start");
  double fnorm = sup_norm(f);

  NewtonResult result;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    if (fnorm <= options.tolerance) {
      result.converged = true;
      result.iterations = iter;
      result.residual_norm = fnorm;
      return result;
    }
    if (jac)
      jac(z, jbuf);
    else
      fd_jacobian(z, n, residual, options.fd_step_scale, jbuf);

    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> J(jbuf.data(), n, n);
    Eigen::Map<const Eigen::VectorXd> F(f.data(), n);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
    Eigen::VectorXd step = lu.solve(-F);
    if (!step.allFinite())
      throw SolverError(ErrorCode::NewtonDivergence, "singular Jacobian in boundary solve");

    double alpha = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= options.max_halvings; ++halving) {
      for (int i = 0; i < n; ++i) trial[i] = z[i] + alpha * step[i];
      residual(trial, ftrial);
      if (!all_finite(ftrial))
        throw SolverError(ErrorCode::NonFiniteEvaluation, "residual not finite during Newton step");
      double tnorm = sup_norm(ftrial);
      if (tnorm < fnorm || tnorm <= options.tolerance) {
        std::copy(trial.begin(), trial.end(), z.begin());
        std::copy(ftrial.begin(), ftrial.end(), f.begin());
        fnorm = tnorm;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) throw SolverError(ErrorCode::NewtonDivergence, "damped step failed to reduce residual");
  }
  if (fnorm <= options.tolerance) {
    result.converged = true;
    result.iterations = options.max_iterations;
    result.residual_norm = fnorm;
    return result;
  }
  throw SolverError(ErrorCode::NewtonDivergence, "no convergence within iteration budget");
}

std::vector<std::vector<double>> quasirandom_ball(int dimension, double radius, int count) {
  // Additive recurrence with the generalized golden ratio for the dimension.
  double phi = 2.0;
  for (int it = 0; it < 64; ++it) phi = std::pow(1.0 + phi, 1.0 / (dimension + 1));
  std::vector<double> alpha(dimension);
  double a = 1.0;
  for (int d = 0; d < dimension; ++d) {
    a /= phi;
    alpha[d] = a;
  }
  std::vector<std::vector<double>> points(count, std::vector<double>(dimension));
  for (int k = 0; k < count; ++k)
    for (int d = 0; d < dimension; ++d) {
      double u = std::fmod(0.5 + (k + 1) * alpha[d], 1.0);
      points[k][d] = (2.0 * u - 1.0) * radius;
    }
  return points;
}

}  // namespace hypctrl
