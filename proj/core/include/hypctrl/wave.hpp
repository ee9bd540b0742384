#pragma once

#include <functional>

#include "hypctrl/control.hpp"
#include "hypctrl/signal.hpp"
#include "hypctrl/system.hpp"

namespace hypctrl {

/// 1-D quasilinear wave equation u_tt - (K(u, u_x))_x = F(u, u_x, u_t) with
/// K_v > 0 near the origin and F(0,0,0) = 0, reduced to the first-order
/// system in (u, v, w) = (u, u_x, u_t).
struct WaveSpec {
  std::function<double(double, double)> flux = [](double, double v) { return v; };  // K(u, v)
  std::function<double(double, double)> flux_u = [](double, double) { return 0.0; };
  std::function<double(double, double)> flux_v = [](double, double) { return 1.0; };
  std::function<double(double, double, double)> source = [](double, double, double) { return 0.0; };
  double length = 2.0 * 3.14159265358979323846;
  double radius = 0.05;
  /// Set when the moving diagonal components carry no sources (F == 0 and
  /// K_u == 0); enables the sharp per-component control windows.
  bool source_free = true;
};

struct WaveScenario {
  WaveSpec spec;
  DiagonalSystem system;  // 3 components: left wave, displacement, right wave
  PhysicalChart chart;    // (u, v, w) <-> diagonal variables
};

/// Builds the 3-component diagonal system with speeds (-sqrt(K_v), 0,
/// +sqrt(K_v)), sources induced by F + K_u v, and the x-slope hook that lets
/// the displacement ride the sidewise march (du/dx = v).
/// Throws SolverError(DegenerateFlux) when K_v <= 0 is encountered.
WaveScenario wave_build(const WaveSpec& spec);

/// Nonlocal displacement/slope coupling u(t,0)-u(t,L) = h(t),
/// u_x(t,0)-u_x(t,L) = hbar(t), encoded through the differentiated form
/// w(t,0)-w(t,L) = h'(t).  `initial_gap` must equal h(0) to 1e-10
/// (IncompatibleData otherwise); h needs derivative-accurate sampling.
NonlocalBC wave_bc(const WaveScenario& scenario, Signal h, Signal hbar, double initial_gap);

/// Diagonal initial data from (u, u_x, u_t) profiles.
Profile wave_initial(const WaveScenario& scenario, int cells, const std::function<double(double)>& u0,
                     const std::function<double(double)>& u0_x, const std::function<double(double)>& u0_t);

/// Minimal control horizon length / sqrt(K_v(0,0)).
double wave_min_control_time(const WaveSpec& spec);

struct WaveControlResult {
  Signal h;
  Signal hbar;
  ControlResult inner;       // generic synthesis on the diagonal system
  double final_u_error = 0.0;
  double final_ut_error = 0.0;
};

/// Boundary controls steering (u, u_t) from (u0, u0_t) to (u1, u1_t); wraps
/// the generic synthesis, extracts (h, hbar) from the witness traces and
/// verifies by a forward solve through wave_bc.
WaveControlResult wave_control(const WaveScenario& scenario, const std::function<double(double)>& u0,
                               const std::function<double(double)>& u0_x, const std::function<double(double)>& u0_t,
                               const std::function<double(double)>& u1, const std::function<double(double)>& u1_x,
                               const std::function<double(double)>& u1_t, double horizon, int cells,
                               const ControlOptions& options = {});

/// Which endpoint each scalar observation is taken at.
enum class WaveObservationVariant {
  U0_Ux0,  // u(t,0), u_x(t,0)
  U0_UxL,
  UL_UxL,
  UL_Ux0,
};

struct WaveObserveResult {
  Profile initial_u;    // reconstructed u(0,.)
  Profile initial_ut;   // reconstructed u_t(0,.)
  ReconstructResult inner;
};

/// Initial-data reconstruction from one displacement and one slope signal
/// (C2/C1-sampled); the boundary conditions complete the traces at both ends.
WaveObserveResult wave_observe(const WaveScenario& scenario, WaveObservationVariant variant, const Signal& u_obs,
                               const Signal& ux_obs, const Signal& h, const Signal& hbar, double horizon,
                               int cells, const ReconstructOptions& options = {});

/// Sup residual of (u, u_x, u_t) inserted into the first-order system with
/// forward time differences and centered space differences; decays at first
/// order for smooth exact solutions.
double wave_system_residual(const WaveSpec& spec, const std::function<double(double, double)>& u,
                            const std::function<double(double, double)>& u_x,
                            const std::function<double(double, double)>& u_t, double horizon, int cells,
                            int time_steps);

/// A posteriori check of the undifferentiated displacement condition:
/// sup_t |u(t,0) - u(t,L) - h(t)| over a solved diagonal field.
double wave_displacement_gap(const WaveScenario& scenario, const GridField& field, const Signal& h);

}  // namespace hypctrl
