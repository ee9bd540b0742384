#include "hypctrl/wave.hpp"

#include <cmath>

#include "hypctrl/errors.hpp"
#include "hypctrl/newton.hpp"
#include "hypctrl/quadrature.hpp"

namespace hypctrl {

namespace {

double root_flux_slope(const WaveSpec& spec, double u, double v) {
  const double kv = spec.flux_v(u, v);
  if (!(kv > 0.0)) throw SolverError(ErrorCode::DegenerateFlux, "flux slope K_v must stay positive");
  return std::sqrt(kv);
}

// Solves sqrt(K_v(u, v)) v = target for v (scalar safeguarded Newton with a
// finite-difference slope; exact in one step when K_v is constant in v).
double slope_from_diagonal(const WaveSpec& spec, double u, double target) {
  double v = target / root_flux_slope(spec, u, 0.0);
  for (int it = 0; it < 50; ++it) {
    const double f = root_flux_slope(spec, u, v) * v - target;
    if (std::abs(f) <= 1e-14 * std::max(1.0, std::abs(target))) return v;
    const double step = 1e-7 * std::max(1.0, std::abs(v));
    const double fp = (root_flux_slope(spec, u, v + step) * (v + step) -
                       root_flux_slope(spec, u, v - step) * (v - step)) /
                      (2.0 * step);
    if (fp == 0.0) break;
    v -= f / fp;
  }
  const double f = root_flux_slope(spec, u, v) * v - target;
  if (std::abs(f) > 1e-10 * std::max(1.0, std::abs(target)))
    throw SolverError(ErrorCode::NewtonDivergence, "slope recovery from diagonal variables failed");
  return v;
}

struct WaveState {
  double u, v, w;
};

WaveState unpack(const WaveSpec& spec, std::span<const double> V) {
  WaveState s;
  s.u = V[1];
  s.v = slope_from_diagonal(spec, s.u, 0.5 * (V[0] - V[2]));
  s.w = 0.5 * (V[0] + V[2]);
  return s;
}

double induced_source(const WaveSpec& spec, const WaveState& s) {
  return spec.source(s.u, s.v, s.w) + spec.flux_u(s.u, s.v) * s.v;
}

}  // namespace

WaveScenario wave_build(const WaveSpec& spec) {
  if (!(spec.flux_v(0.0, 0.0) > 0.0))
    throw SolverError(ErrorCode::DegenerateFlux, "flux slope K_v(0,0) must be positive");
  if (std::abs(spec.source(0.0, 0.0, 0.0)) > 1e-12)
    throw SolverError(ErrorCode::BadConfig, "source must vanish at the origin");

  WaveScenario scn;
  scn.spec = spec;
  WaveSpec sp = spec;

  DiagonalSystem& sys = scn.system;
  sys.components = 3;
  sys.negative = 1;
  sys.zero = 1;
  sys.radius = spec.radius;
  sys.length = spec.length;
  sys.source_free = spec.source_free;
  sys.speeds = [sp](std::span<const double> V, std::span<double> out) {
    WaveState s = unpack(sp, V);
    const double c = root_flux_slope(sp, s.u, s.v);
    out[0] = -c;
    out[1] = 0.0;
    out[2] = c;
  };
  sys.sources = [sp](std::span<const double> V, std::span<double> out) {
    WaveState s = unpack(sp, V);
    const double f = induced_source(sp, s);
    out[0] = f;
    out[1] = s.w;  // the displacement integrates u_t
    out[2] = f;
  };
  sys.zero_x_slope = [sp](std::span<const double> V, std::span<double> out) {
    WaveState s = unpack(sp, V);
    out[0] = 0.0;
    out[1] = s.v;  // du/dx = u_x
    out[2] = 0.0;
  };

  scn.chart.physical_dim = 3;
  scn.chart.diagonal_dim = 3;
  scn.chart.equilibrium = {0.0, 0.0, 0.0};
  scn.chart.to_diag = [sp](std::span<const double> U, std::span<double> V) {
    const double c = root_flux_slope(sp, U[0], U[1]);
    V[0] = c * U[1] + U[2];
    V[1] = U[0];
    V[2] = -c * U[1] + U[2];
  };
  scn.chart.from_diag = [sp](std::span<const double> V, std::span<double> U) {
    WaveState s = unpack(sp, V);
    U[0] = s.u;
    U[1] = s.v;
    U[2] = s.w;
  };
  return scn;
}

NonlocalBC wave_bc(const WaveScenario& scenario, Signal h, Signal hbar, double initial_gap) {
  if (std::abs(initial_gap - h(0.0)) > 1e-10)
    throw SolverError(ErrorCode::IncompatibleData,
                      "u(0,0) - u(0,L) must equal h(0): gap " + std::to_string(initial_gap) + " vs " +
                          std::to_string(h(0.0)));

  WaveSpec sp = scenario.spec;
  Signal h_sig = h, hbar_sig = hbar;

  // Relations solved for z = (V3(t,0), V1(t,L)) given
  // w = (V1(t,0), V2(t,0), V2(t,L), V3(t,L)).
  auto rhs = [sp, h_sig, hbar_sig](double t, std::span<const double> w, std::span<double> out) {
    const double hd = h_sig.derivative(t);
    const double hb = hbar_sig(t);
    std::vector<double> z{w[3], w[0]};  // start from the pure-periodicity guess
    auto residual = [&](std::span<const double> zz, std::span<double> rr) {
      const double v0 = slope_from_diagonal(sp, w[1], 0.5 * (w[0] - zz[0]));
      const double vL = slope_from_diagonal(sp, w[2], 0.5 * (zz[1] - w[3]));
      rr[0] = 0.5 * (w[0] + zz[0]) - 0.5 * (zz[1] + w[3]) - hd;
      rr[1] = v0 - vL - hb;
    };
    newton_solve(z, residual);
    out[0] = z[0];
    out[1] = z[1];
  };

  // Nondegeneracy at the origin (-1 / (2 sqrt(K_v(0,0))) in closed form).
  {
    std::vector<double> w(4, 0.0), jac(4);
    auto res0 = [&](std::span<const double> zz, std::span<double> rr) {
      const double v0 = slope_from_diagonal(sp, 0.0, -0.5 * zz[0]);
      const double vL = slope_from_diagonal(sp, 0.0, 0.5 * zz[1]);
      rr[0] = 0.5 * zz[0] - 0.5 * zz[1];
      rr[1] = v0 - vL;
    };
    std::vector<double> z0(2, 0.0);
    fd_jacobian(z0, 2, res0, 1e-6, jac);
    const double det = jac[0] * jac[3] - jac[1] * jac[2];
    if (std::abs(det) < 1e-12)
      throw SolverError(ErrorCode::SingularBoundaryJacobian, "wave boundary relations degenerate");
  }

  return NonlocalBC::from_rhs(BcLayout{3, 1, 2}, rhs, {std::move(h), std::move(hbar)});
}

Profile wave_initial(const WaveScenario& scenario, int cells, const std::function<double(double)>& u0,
                     const std::function<double(double)>& u0_x, const std::function<double(double)>& u0_t) {
  WaveSpec sp = scenario.spec;
  return Profile::analytic(3, scenario.spec.length, cells, [sp, u0, u0_x, u0_t](double x, std::span<double> out) {
    const double u = u0(x), v = u0_x(x), w = u0_t(x);
    const double c = root_flux_slope(sp, u, v);
    out[0] = c * v + w;
    out[1] = u;
    out[2] = -c * v + w;
  });
}

double wave_min_control_time(const WaveSpec& spec) {
  return spec.length / std::sqrt(spec.flux_v(0.0, 0.0));
}

WaveControlResult wave_control(const WaveScenario& scenario, const std::function<double(double)>& u0,
                               const std::function<double(double)>& u0_x, const std::function<double(double)>& u0_t,
                               const std::function<double(double)>& u1, const std::function<double(double)>& u1_x,
                               const std::function<double(double)>& u1_t, double horizon, int cells,
                               const ControlOptions& options) {
  const WaveSpec& sp = scenario.spec;
  const double t_star = wave_min_control_time(sp);
  if (horizon <= t_star)
    throw SolverError(ErrorCode::TimeTooShort, "horizon " + std::to_string(horizon) +
                                                   " is at or below the wave control threshold " +
                                                   std::to_string(t_star));

  Profile phi = wave_initial(scenario, cells, u0, u0_x, u0_t);
  Profile psi = wave_initial(scenario, cells, u1, u1_x, u1_t);
  NonlocalBC bc_template = wave_bc(scenario, Signal::zero(horizon), Signal::zero(horizon), 0.0);

  WaveControlResult out;
  out.inner = synthesize_controls(scenario.system, bc_template, phi, psi, horizon, cells, options);

  // Natural controls from the witness traces: hbar = u_x gap, h' = u_t gap,
  // h integrated from the initial displacement gap.
  const GridField& witness = out.inner.witness;
  const int steps = witness.time_steps();
  const double dt = witness.dt();
  std::vector<double> h_vals(steps + 1), hd_vals(steps + 1), hb_vals(steps + 1);
  const double gap0 = u0(0.0) - u0(sp.length);
  std::vector<double> state(3);
  for (int k = 0; k <= steps; ++k) {
    auto V0 = witness.state(k, 0);
    auto VL = witness.state(k, cells);
    scenario.chart.from_diag(V0, state);
    const double v0 = state[1], w0 = state[2];
    scenario.chart.from_diag(VL, state);
    const double vL = state[1], wL = state[2];
    hd_vals[k] = w0 - wL;
    hb_vals[k] = v0 - vL;
    h_vals[k] = k == 0 ? gap0 : h_vals[k - 1] + 0.5 * dt * (hd_vals[k - 1] + hd_vals[k]);
  }
  out.h = Signal::with_derivative_samples(horizon, std::move(h_vals), std::move(hd_vals));
  out.hbar = Signal(horizon, std::move(hb_vals));

  NonlocalBC bc = wave_bc(scenario, out.h, out.hbar, gap0);
  SolveOptions so = options.solve;
  so.c0_tolerance = std::max(so.c0_tolerance, options.verify_c0_tolerance);
  SolveResult ver = solve_forward(scenario.system, bc, phi, horizon, cells, so);

  const GridField& f = ver.field;
  for (int j = 0; j <= cells; ++j) {
    scenario.chart.from_diag(f.state(f.time_steps(), j), state);
    const double x = f.node(j);
    out.final_u_error = std::max(out.final_u_error, std::abs(state[0] - u1(x)));
    out.final_ut_error = std::max(out.final_ut_error, std::abs(state[2] - u1_t(x)));
  }
  return out;
}

WaveObserveResult wave_observe(const WaveScenario& scenario, WaveObservationVariant variant, const Signal& u_obs,
                               const Signal& ux_obs, const Signal& h, const Signal& hbar, double horizon,
                               int cells, const ReconstructOptions& options) {
  const WaveSpec& sp = scenario.spec;
  const bool u_at_0 =
      variant == WaveObservationVariant::U0_Ux0 || variant == WaveObservationVariant::U0_UxL;
  const bool ux_at_0 =
      variant == WaveObservationVariant::U0_Ux0 || variant == WaveObservationVariant::UL_Ux0;

  int steps = std::max({2, u_obs.sample_count() - 1, ux_obs.sample_count() - 1});
  Trace trace0(3, horizon, steps), traceL(3, horizon, steps);
  for (int k = 0; k <= steps; ++k) {
    const double t = trace0.time(k);
    const double u0 = u_at_0 ? u_obs(t) : u_obs(t) + h(t);
    const double uL = u_at_0 ? u_obs(t) - h(t) : u_obs(t);
    const double w0 = u_at_0 ? u_obs.derivative(t) : u_obs.derivative(t) + h.derivative(t);
    const double wL = w0 - h.derivative(t);
    const double v0 = ux_at_0 ? ux_obs(t) : ux_obs(t) + hbar(t);
    const double vL = v0 - hbar(t);
    const double c0 = std::sqrt(sp.flux_v(u0, v0));
    const double cL = std::sqrt(sp.flux_v(uL, vL));
    auto s0 = trace0.state(k);
    s0[0] = c0 * v0 + w0;
    s0[1] = u0;
    s0[2] = -c0 * v0 + w0;
    auto sL = traceL.state(k);
    sL[0] = cL * vL + wL;
    sL[1] = uL;
    sL[2] = -cL * vL + wL;
  }

  WaveObserveResult out;
  out.inner = reconstruct_from_traces(scenario.system, trace0, traceL, cells, options);

  const Profile& rec = out.inner.initial;
  std::vector<double> u_data(static_cast<size_t>(cells + 1)), w_data(static_cast<size_t>(cells + 1));
  std::vector<double> state(3);
  for (int j = 0; j <= cells; ++j) {
    scenario.chart.from_diag(rec.state(j), state);
    u_data[j] = state[0];
    w_data[j] = state[2];
  }
  out.initial_u = Profile(1, sp.length, std::move(u_data));
  out.initial_ut = Profile(1, sp.length, std::move(w_data));
  return out;
}

double wave_system_residual(const WaveSpec& spec, const std::function<double(double, double)>& u,
                            const std::function<double(double, double)>& u_x,
                            const std::function<double(double, double)>& u_t, double horizon, int cells,
                            int time_steps) {
  const double dx = spec.length / cells;
  const double dt = horizon / time_steps;
  double sup = 0.0;
  auto dxc = [&](const std::function<double(double, double)>& f, double t, int j) {
    const double x = j * dx;
    if (j == 0) return (f(t, dx) - f(t, 0.0)) / dx;
    if (j == cells) return (f(t, spec.length) - f(t, spec.length - dx)) / dx;
    return (f(t, x + dx) - f(t, x - dx)) / (2.0 * dx);
  };
  for (int k = 0; k < time_steps; ++k) {
    const double t = k * dt;
    for (int j = 0; j <= cells; ++j) {
      const double x = j * dx;
      const double uv = u(t, x), vv = u_x(t, x), wv = u_t(t, x);
      const double r1 = (u(t + dt, x) - uv) / dt - wv;
      const double r2 = (u_x(t + dt, x) - vv) / dt - dxc(u_t, t, j);
      const double r3 = (u_t(t + dt, x) - wv) / dt - spec.flux_v(uv, vv) * dxc(u_x, t, j) -
                        (spec.source(uv, vv, wv) + spec.flux_u(uv, vv) * vv);
      sup = std::max({sup, std::abs(r1), std::abs(r2), std::abs(r3)});
    }
  }
  return sup;
}

double wave_displacement_gap(const WaveScenario& scenario, const GridField& field, const Signal& h) {
  (void)scenario;
  double sup = 0.0;
  for (int k = 0; k <= field.time_steps(); ++k)
    sup = std::max(sup, std::abs(field.at(k, 0, 1) - field.at(k, field.cells(), 1) - h(field.time(k))));
  return sup;
}

}  // namespace hypctrl
