#include "hypctrl/saint_venant.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "hypctrl/errors.hpp"
#include "hypctrl/newton.hpp"
#include "hypctrl/quadrature.hpp"

namespace hypctrl {

namespace {

double celerity(double area, const CanalSpec& spec) {
  return std::sqrt(spec.gravity * area * spec.depth_prime(area));
}

double celerity_integral(double area, const CanalSpec& spec) {
  // G(A) = integral from Aeq to A of sqrt(g H'(a)/a) da, strictly increasing
  return adaptive_simpson([&spec](double a) { return std::sqrt(spec.gravity * spec.depth_prime(a) / a); },
                          spec.equilibrium_area, area, 1e-12);
}

double invert_celerity_integral(double target, const CanalSpec& spec) {
  // Safeguarded Newton on G(A) = target with multiplicative bracket expansion.
  double lo = spec.equilibrium_area, hi = spec.equilibrium_area;
  double glo = 0.0, ghi = 0.0;
  for (int it = 0; it < 200 && glo > target; ++it) {
    lo *= 0.5;
    if (lo < 1e-300) throw SolverError(ErrorCode::ChartDomainExceeded, "area bracket collapsed toward zero");
    glo = celerity_integral(lo, spec);
  }
  for (int it = 0; it < 200 && ghi < target; ++it) {
    hi *= 2.0;
    if (!std::isfinite(ghi))
      throw SolverError(ErrorCode::ChartDomainExceeded, "area bracket expansion diverged");
    ghi = celerity_integral(hi, spec);
  }
  double a = std::clamp(spec.equilibrium_area, lo, hi);
  for (int it = 0; it < 100; ++it) {
    double g = celerity_integral(a, spec);
    double err = g - target;
    if (std::abs(err) <= 1e-13 * std::max(1.0, std::abs(target))) return a;
    if (err > 0.0)
      hi = a;
    else
      lo = a;
    double slope = std::sqrt(spec.gravity * spec.depth_prime(a) / a);
    double next = a - err / slope;
    a = (next > lo && next < hi) ? next : 0.5 * (lo + hi);
  }
  throw SolverError(ErrorCode::ChartDomainExceeded, "area inversion did not converge in 100 iterations");
}

void check_spec(const CanalSpec& spec) {
  if (spec.equilibrium_area <= 0.0)
    throw SolverError(ErrorCode::BadConfig, "equilibrium area must be positive");
  for (int k = 0; k <= 16; ++k) {
    double a = spec.equilibrium_area * (0.5 + 1.5 * k / 16.0);  // samples [Aeq/2, 2 Aeq]
    if (!(spec.depth_prime(a) > 0.0))
      throw SolverError(ErrorCode::BadConfig, "depth derivative must stay positive near the equilibrium");
  }
  const double c = celerity(spec.equilibrium_area, spec);
  if (!(spec.equilibrium_velocity * spec.equilibrium_velocity < c * c))
    throw SolverError(ErrorCode::SupercriticalEquilibrium,
                      "equilibrium velocity exceeds the wave celerity");
}

}  // namespace

void sv_eigen(double area, double velocity, const CanalSpec& spec, double& lambda1, double& lambda2) {
  const double c = celerity(area, spec);
  lambda1 = velocity - c;
  lambda2 = velocity + c;
}

void sv_riemann(double area, double velocity, const CanalSpec& spec, double& r, double& s) {
  if (area <= 0.0) throw SolverError(ErrorCode::ChartDomainExceeded, "area must be positive");
  const double g = celerity_integral(area, spec);
  const double dv = velocity - spec.equilibrium_velocity;
  r = 0.5 * (dv - g);
  s = 0.5 * (dv + g);
}

void sv_physical(double r, double s, const CanalSpec& spec, double& area, double& velocity) {
  velocity = r + s + spec.equilibrium_velocity;
  area = invert_celerity_integral(s - r, spec);
}

double sv_energy_boundary_det(const CanalSpec& spec) {
  const double aeq = spec.equilibrium_area;
  const double hp = spec.depth_prime(aeq);
  const double veq = spec.equilibrium_velocity;
  return 2.0 * std::sqrt(aeq / (spec.gravity * hp)) * (veq * veq - spec.gravity * aeq * hp);
}

SvScenario sv_build(const CanalSpec& spec, CanalBcKind kind, Signal h, Signal hbar) {
  check_spec(spec);

  SvScenario scn;
  scn.spec = spec;
  scn.bc_kind = kind;

  DiagonalSystem& sys = scn.system;
  sys.components = 2;
  sys.negative = 1;
  sys.zero = 0;
  sys.radius = spec.radius;
  sys.length = spec.length;
  sys.source_free = true;
  CanalSpec sp = spec;  // owned by the callbacks
  sys.speeds = [sp](std::span<const double> v, std::span<double> out) {
    double area, velocity;
    sv_physical(v[0], v[1], sp, area, velocity);
    sv_eigen(area, velocity, sp, out[0], out[1]);
  };
  sys.sources = [](std::span<const double>, std::span<double> out) { out[0] = out[1] = 0.0; };

  scn.chart.physical_dim = 2;
  scn.chart.diagonal_dim = 2;
  scn.chart.equilibrium = {spec.equilibrium_area, spec.equilibrium_velocity};
  scn.chart.to_diag = [sp](std::span<const double> u, std::span<double> v) {
    sv_riemann(u[0], u[1], sp, v[0], v[1]);
  };
  scn.chart.from_diag = [sp](std::span<const double> v, std::span<double> u) {
    sv_physical(v[0], v[1], sp, u[0], u[1]);
  };

  // Boundary relations P1, P2 between the endpoint states, solved for the
  // incoming pair z = (s(t,0), r(t,L)) given w = (r(t,0), s(t,L)).
  const bool energy = kind == CanalBcKind::Energy;
  auto residual_jac = [sp, energy](std::span<const double> z, std::span<const double> w, double hv, double hbv,
                                   std::span<double> res, std::span<double> jac) {
    double a1, v1, a2, v2;
    sv_physical(w[0], z[0], sp, a1, v1);  // x = 0
    sv_physical(z[1], w[1], sp, a2, v2);  // x = L
    const double hp1 = sp.depth_prime(a1), hp2 = sp.depth_prime(a2);
    const double c1 = std::sqrt(sp.gravity * a1 * hp1), c2 = std::sqrt(sp.gravity * a2 * hp2);
    // dA/ds at x=0 and dA/dr at x=L through the inverse celerity integral
    const double da1 = std::sqrt(a1 / (sp.gravity * hp1));
    const double da2 = -std::sqrt(a2 / (sp.gravity * hp2));
    if (energy) {
      res[0] = 0.5 * (v1 * v1 - v2 * v2) + sp.gravity * (sp.depth(a1) - sp.depth(a2)) - hv;
      jac[0] = v1 + sp.gravity * hp1 * da1;  // = v1 + c1
      jac[1] = -(v2 + sp.gravity * hp2 * da2);
    } else {
      res[0] = sp.depth(a1) - sp.depth(a2) - hv;
      jac[0] = hp1 * da1;
      jac[1] = -hp2 * da2;
    }
    res[1] = a1 * v1 - a2 * v2 - hbv;
    jac[2] = a1 + v1 * da1;
    jac[3] = -(a2 + v2 * da2);
  };

  // Equilibrium determinant gate.
  {
    std::vector<double> z{0.0, 0.0}, w{0.0, 0.0}, res(2), jac(4);
    residual_jac(z, w, 0.0, 0.0, res, jac);
    scn.boundary_jacobian_det = jac[0] * jac[3] - jac[1] * jac[2];
    if (std::abs(scn.boundary_jacobian_det) < 1e-12)
      throw SolverError(ErrorCode::SingularBoundaryJacobian,
                        "boundary relations degenerate at the equilibrium");
  }

  auto seed = std::make_shared<std::vector<double>>(2, 0.0);
  Signal h_sig = h, hbar_sig = hbar;
  auto rhs = [residual_jac, seed, h_sig, hbar_sig](double t, std::span<const double> w, std::span<double> out) {
    const double hv = h_sig(t), hbv = hbar_sig(t);
    std::vector<double> z = *seed;
    auto res_fn = [&](std::span<const double> zz, std::span<double> rr) {
      std::vector<double> jac(4);
      residual_jac(zz, w, hv, hbv, rr, jac);
    };
    auto jac_fn = [&](std::span<const double> zz, std::span<double> jj) {
      std::vector<double> rr(2);
      residual_jac(zz, w, hv, hbv, rr, jj);
    };
    newton_solve(z, res_fn, jac_fn);
    *seed = z;
    out[0] = z[0];
    out[1] = z[1];
  };

  scn.bc = NonlocalBC::from_rhs(BcLayout{2, 1, 1}, rhs, {std::move(h), std::move(hbar)});
  return scn;
}

SvScenario sv_build(const CanalSpec& spec, CanalBcKind kind, double horizon) {
  return sv_build(spec, kind, Signal::zero(horizon), Signal::zero(horizon));
}

}  // namespace hypctrl
