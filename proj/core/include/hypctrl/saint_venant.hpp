#pragma once

#include <functional>

#include "hypctrl/signal.hpp"
#include "hypctrl/system.hpp"

namespace hypctrl {

/// Horizontal cylindrical canal: cross-section area A, mean velocity V,
/// depth H(A) with H'(A) > 0, around a constant subcritical equilibrium.
struct CanalSpec {
  double gravity = 9.81;
  std::function<double(double)> depth = [](double a) { return a; };        // H(A)
  std::function<double(double)> depth_prime = [](double) { return 1.0; };  // H'(A)
  double equilibrium_area = 2.0;      // must be > 0
  double equilibrium_velocity = 0.5;  // subcritical: V^2 < g A H'(A)
  double length = 1.0;
  double radius = 0.05;  // admissible ball in Riemann coordinates
};

enum class CanalBcKind {
  Energy,      // 1/2 V^2 + g H(A) balance between the endpoints
  WaterLevel,  // H(A) difference between the endpoints
};

/// Characteristic speeds V -+ sqrt(g A H'(A)).
void sv_eigen(double area, double velocity, const CanalSpec& spec, double& lambda1, double& lambda2);

/// Riemann coordinates r = (V - Veq - G(A))/2, s = (V - Veq + G(A))/2 with
/// G(A) the integrated celerity from the equilibrium area.
void sv_riemann(double area, double velocity, const CanalSpec& spec, double& r, double& s);
/// Inverse transform; the area comes from inverting G by safeguarded Newton.
/// Throws SolverError(ChartDomainExceeded) when no admissible area exists.
void sv_physical(double r, double s, const CanalSpec& spec, double& area, double& velocity);

struct SvScenario {
  CanalSpec spec;
  DiagonalSystem system;  // 2 components: r (left-moving), s (right-moving)
  NonlocalBC bc;
  PhysicalChart chart;    // (A, V) <-> (r, s)
  CanalBcKind bc_kind = CanalBcKind::Energy;
  double boundary_jacobian_det = 0.0;  // at the equilibrium, fixed at build time
};

/// Builds the diagonal system, the chart and the nonlocal boundary maps for
/// the inhomogeneity pair (h, hbar).  The boundary relations are solved for
/// the incoming pair (s(t,0), r(t,L)) by damped Newton with the analytic
/// Jacobian; the build checks the equilibrium determinant is safely nonzero.
/// Throws SupercriticalEquilibrium / SingularBoundaryJacobian / BadConfig.
SvScenario sv_build(const CanalSpec& spec, CanalBcKind kind, Signal h, Signal hbar);

/// Same scenario with zero inhomogeneity (the control template).
SvScenario sv_build(const CanalSpec& spec, CanalBcKind kind, double horizon);

/// Closed-form equilibrium determinant of d(P1,P2)/d(s1,r2) for the energy
/// boundary kind: 2 sqrt(Aeq/(g H'(Aeq))) (Veq^2 - g Aeq H'(Aeq)).
double sv_energy_boundary_det(const CanalSpec& spec);

}  // namespace hypctrl
