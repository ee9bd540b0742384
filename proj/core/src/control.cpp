#include "hypctrl/control.hpp"

#include <algorithm>
#include <cmath>

#include "hypctrl/errors.hpp"

namespace hypctrl {

namespace {

// Quintic with prescribed value and slope and zero curvature at both ends of
// [0,1]; the flat ends keep one-sided difference quotients of the assembled
// trace continuous through the junctions.
double quintic(double s, double v0, double d0, double v1, double d1, double width) {
  const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
  const double h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
  const double h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
  const double h3 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
  const double h4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
  return v0 * h0 + d0 * width * h1 + v1 * h3 + d1 * width * h4;
}

Profile difference_profile(const Profile& a, const Profile& b) {
  std::vector<double> data(a.data().begin(), a.data().end());
  for (int j = 0; j <= a.cells(); ++j) {
    auto bs = b.state(j);
    for (int i = 0; i < a.components(); ++i) data[static_cast<size_t>(j) * a.components() + i] -= bs[i];
  }
  return Profile(a.components(), a.length(), std::move(data));
}

double slice_mismatch(const GridField& field, int row, const Profile& target) {
  double sup = 0.0;
  for (int j = 0; j <= field.cells(); ++j) {
    auto v = field.state(row, j);
    for (int i = 0; i < field.components(); ++i)
      sup = std::max(sup, std::abs(v[i] - target.value(i, field.node(j))));
  }
  return sup;
}

}  // namespace

JoinedTrace::JoinedTrace(Trace forward, Trace backward, std::span<const double> junction_lo,
                         std::span<const double> junction_hi)
    : fwd_(std::move(forward)), bwd_(std::move(backward)) {
  const int n = fwd_.components();
  lo_.resize(n);
  hi_.resize(n);
  d_lo_.resize(n);
  d_hi_.resize(n);
  // Junctions snap onto the source sample grids; the blend then inherits the
  // exact value and segment slope of the piecewise-linear interpolants.
  for (int i = 0; i < n; ++i) {
    const double dtf = fwd_.dt(), dtb = bwd_.dt();
    int kf = std::clamp(static_cast<int>(std::floor(junction_lo[i] / dtf)), 1, fwd_.time_steps() - 1);
    int kb = std::clamp(static_cast<int>(std::ceil(junction_hi[i] / dtb)), 1, bwd_.time_steps() - 1);
    lo_[i] = kf * dtf;
    hi_[i] = kb * dtb;
    d_lo_[i] = (fwd_.state(kf)[i] - fwd_.state(kf - 1)[i]) / dtf;
    d_hi_[i] = (bwd_.state(kb + 1)[i] - bwd_.state(kb)[i]) / dtb;
  }
}

double JoinedTrace::value(int i, double t) const {
  if (t <= lo_[i]) return fwd_.value(i, t);
  if (t >= hi_[i]) return bwd_.value(i, t);
  const double width = hi_[i] - lo_[i];
  return quintic((t - lo_[i]) / width, fwd_.value(i, lo_[i]), d_lo_[i], bwd_.value(i, hi_[i]), d_hi_[i], width);
}

Trace JoinedTrace::sample(int steps) const {
  Trace out(fwd_.components(), fwd_.horizon(), steps);
  for (int k = 0; k <= steps; ++k) {
    auto dst = out.state(k);
    for (int i = 0; i < fwd_.components(); ++i) dst[i] = value(i, out.time(k));
  }
  return out;
}

double min_control_time(const DiagonalSystem& sys) {
  std::vector<double> lam(sys.components), origin(sys.components, 0.0);
  sys.speeds(origin, lam);
  double slowness = 0.0;
  for (int i = 0; i < sys.components; ++i) {
    if (sys.is_zero(i)) continue;
    if (lam[i] == 0.0)
      throw SolverError(ErrorCode::ZeroEigenvalue, "moving component has zero speed at the origin");
    slowness = std::max(slowness, 1.0 / std::abs(lam[i]));
  }
  if (slowness == 0.0)
    throw SolverError(ErrorCode::ZeroEigenvalue, "system has no moving components");
  return sys.length * slowness;
}

ControlResult synthesize_controls(const DiagonalSystem& sys, const NonlocalBC& bc_template, const Profile& phi,
                                  const Profile& psi, double horizon, int cells, const ControlOptions& options) {
  const int n = sys.components;
  const double t_star = min_control_time(sys);
  if (horizon <= t_star)
    throw SolverError(ErrorCode::TimeTooShort, "horizon " + std::to_string(horizon) +
                                                   " is at or below the control threshold T* = " +
                                                   std::to_string(t_star));

  std::vector<double> lam0(n), origin(n, 0.0);
  sys.speeds(origin, lam0);

  // Trace windows.  Each component must follow the forward solution long
  // enough for its t=0 row to be determined by consistent data, and the
  // backward solution symmetrically; with sources the slowest family sets a
  // common window for everyone, without them each component only waits for its
  // own characteristic to cross the interval.
  double slow_neg = 0.0, slow_pos = 0.0;
  for (int i = 0; i < n; ++i) {
    if (sys.is_negative(i)) slow_neg = std::max(slow_neg, 1.0 / std::abs(lam0[i]));
    if (sys.is_positive(i)) slow_pos = std::max(slow_pos, 1.0 / lam0[i]);
  }
  std::vector<double> fwd_need(n, 0.0), bwd_need(n, 0.0);
  for (int i = 0; i < n; ++i) {
    if (sys.source_free) {
      if (sys.is_negative(i)) fwd_need[i] = options.speed_margin * sys.length / std::abs(lam0[i]);
      if (sys.is_positive(i)) bwd_need[i] = options.speed_margin * sys.length / lam0[i];
    } else {
      fwd_need[i] = options.speed_margin * sys.length * slow_neg;
      bwd_need[i] = options.speed_margin * sys.length * slow_pos;
    }
  }
  std::vector<double> lo(n), hi(n);
  for (int i = 0; i < n; ++i) {
    double slack = horizon - fwd_need[i] - bwd_need[i];
    if (slack <= 0.0)
      throw SolverError(ErrorCode::TimeTooShort,
                        "component " + std::to_string(i) + " trace windows need more than T = " +
                            std::to_string(horizon) + " (threshold T* = " + std::to_string(t_star) + ")");
    const double blend = slack * options.blend_fraction;
    lo[i] = fwd_need[i] + 0.5 * (slack - blend);
    hi[i] = lo[i] + blend;
  }

  SolveResult fwd = solve_forward(sys, bc_template, phi, horizon, cells, options.solve);
  SolveResult bwd = solve_backward(sys, bc_template, psi, horizon, cells, options.solve);
  Trace trace_f = Trace::from_field(fwd.field, 0);
  Trace trace_b = Trace::from_field(bwd.field, 0);

  JoinedTrace assembly(std::move(trace_f), std::move(trace_b), lo, hi);
  Trace joined = assembly.sample(fwd.field.time_steps());

  SidewiseResult side = solve_sidewise(sys, joined, phi, psi, cells, options.solve);
  if (!side.full)
    throw SolverError(ErrorCode::CoverageFailure, "sidewise march could not honor the data rows");

  ControlResult result;
  result.horizon_used = horizon;
  result.initial_mismatch = slice_mismatch(side.field, 0, phi);
  result.final_mismatch = slice_mismatch(side.field, side.field.time_steps(), psi);
  result.coverage_ok = true;

  // Controls read off the witness: H = incoming - G_in(t, outgoing).
  const BcLayout lay = bc_template.layout();
  const int steps = side.field.time_steps();
  std::vector<std::vector<double>> hvals(lay.incoming_size(), std::vector<double>(steps + 1));
  std::vector<double> w(lay.outgoing_size()), rhs(lay.incoming_size()), z(lay.incoming_size());
  for (int k = 0; k <= steps; ++k) {
    auto v0 = side.field.state(k, 0);
    auto vL = side.field.state(k, cells);
    lay.gather_outgoing(v0, vL, w);
    bc_template.incoming(side.field.time(k), w, rhs);
    lay.gather_incoming(v0, vL, z);
    for (int slot = 0; slot < lay.incoming_size(); ++slot) hvals[slot][k] = z[slot] - rhs[slot];
  }
  for (auto& vals : hvals) result.controls.emplace_back(horizon, std::move(vals));

  // Residual of the relations re-evaluated with the extracted controls.
  NonlocalBC bc_controlled = bc_template.with_inhomogeneity(result.controls);
  double residual = 0.0;
  for (int k = 0; k <= steps; ++k) {
    auto v0 = side.field.state(k, 0);
    auto vL = side.field.state(k, cells);
    lay.gather_outgoing(v0, vL, w);
    bc_controlled.incoming(side.field.time(k), w, rhs);
    lay.gather_incoming(v0, vL, z);
    for (int slot = 0; slot < lay.incoming_size(); ++slot)
      residual = std::max(residual, std::abs(z[slot] - rhs[slot]));
  }
  result.boundary_residual = residual;
  result.witness = std::move(side.field);
  return result;
}

VerifyResult verify_control(const DiagonalSystem& sys, const NonlocalBC& bc_template, const Profile& phi,
                            const std::vector<Signal>& controls, const Profile& psi, double horizon, int cells,
                            const ControlOptions& options) {
  NonlocalBC bc = bc_template.with_inhomogeneity(controls);
  SolveOptions so = options.solve;
  so.c0_tolerance = std::max(so.c0_tolerance, options.verify_c0_tolerance);
  SolveResult res = solve_forward(sys, bc, phi, horizon, cells, so);

  Profile final_slice = res.field.slice(res.field.time_steps());
  Profile target = Profile::sample(psi.components(), psi.length(), cells,
                                   [&psi](double x, std::span<double> out) { psi.values(x, out); });
  Profile diff = difference_profile(final_slice, target);
  VerifyResult out;
  out.final_sup_error = diff.sup_norm();
  out.final_c1_error = diff.c1_norm();
  out.field = std::move(res.field);
  return out;
}

ObservationSet ObservationSet::from_field(const DiagonalSystem& sys, const GridField& field,
                                          const NonlocalBC& bc) {
  ObservationSet obs;
  obs.horizon = field.horizon();
  const int m = sys.positive_begin();
  for (int i = 0; i < m; ++i) {
    std::vector<double> vals(field.time_steps() + 1);
    for (int k = 0; k <= field.time_steps(); ++k) vals[k] = field.at(k, 0, i);
    obs.at_0.emplace_back(obs.horizon, std::move(vals));
  }
  for (int i = m; i < sys.components; ++i) {
    std::vector<double> vals(field.time_steps() + 1);
    for (int k = 0; k <= field.time_steps(); ++k) vals[k] = field.at(k, field.cells(), i);
    obs.at_L.emplace_back(obs.horizon, std::move(vals));
  }
  obs.known_inhomogeneity = bc.collected_signals();
  return obs;
}

double ObservationSet::norm_sum() const {
  double sum = 0.0;
  for (const auto& s : at_0) sum += s.c1_norm();
  for (const auto& s : at_L) sum += s.c1_norm();
  for (const auto& s : known_inhomogeneity) sum += s.c1_norm();
  return sum;
}

ReconstructResult reconstruct_from_traces(const DiagonalSystem& sys, const Trace& trace_at_0,
                                          const Trace& trace_at_L, int cells, const ReconstructOptions& options) {
  const int n = sys.components;
  const double horizon = trace_at_0.horizon();
  const double dx = sys.length / cells;

  // Shared sidewise grid for both marches.
  double min_speed = sys.min_nonzero_speed_in_ball(options.solve.ball_samples);
  if (!(min_speed >= kDegenerateSpeedThreshold))
    throw SolverError(ErrorCode::DegenerateSpeed, "characteristic speed below threshold");
  SolveOptions side_opt = options.solve;
  if (!side_opt.time_steps)
    side_opt.time_steps = std::max(2, static_cast<int>(std::floor(horizon * min_speed * side_opt.cfl / dx)));

  SidewiseResult from_left = solve_sidewise(sys, trace_at_0, std::nullopt, std::nullopt, cells, side_opt);
  SidewiseResult from_right = solve_sidewise_from_right(sys, trace_at_L, cells, side_opt);
  const int steps = from_left.field.time_steps();

  // Deepest level each row survives to, from either side.
  std::vector<int> reach_left(steps + 1, -1), reach_right(steps + 1, cells + 1);
  for (int j = 0; j <= cells; ++j)
    for (int k = std::max(0, from_left.row_lo[j]); k <= std::min(steps, from_left.row_hi[j]); ++k)
      reach_left[k] = j;
  for (int j = cells; j >= 0; --j)
    for (int k = std::max(0, from_right.row_lo[j]); k <= std::min(steps, from_right.row_hi[j]); ++k)
      reach_right[k] = j;

  int best_row = -1, best_overlap = -1;
  for (int k = 1; k <= steps; ++k) {
    if (reach_left[k] + 1 < reach_right[k]) continue;  // row not fully covered
    int overlap = reach_left[k] - reach_right[k];
    if (overlap > best_overlap) {
      best_overlap = overlap;
      best_row = k;
    }
  }
  if (best_row < 0)
    throw SolverError(ErrorCode::CoverageFailure,
                      "no cross-section is determined by both boundary traces; horizon too short");

  ReconstructResult result;
  result.slice_time = from_left.field.time(best_row);
  result.overlap_nodes = std::max(0, best_overlap + 1);

  double disagreement = 0.0;
  for (int j = std::max(0, reach_right[best_row]); j <= std::min(cells, reach_left[best_row]); ++j)
    for (int i = 0; i < n; ++i)
      disagreement =
          std::max(disagreement, std::abs(from_left.field.at(best_row, j, i) - from_right.field.at(best_row, j, i)));
  result.overlap_disagreement = disagreement;

  double trace_scale = 0.0;
  for (int i = 0; i < n; ++i)
    trace_scale += trace_at_0.c1_norm(i) + trace_at_L.c1_norm(i);
  double tol = options.agreement_tolerance.value_or(
      20.0 * trace_scale * (dx / sys.length) * std::max(1.0, horizon / sys.length) + 1e-12);
  if (disagreement > tol)
    throw SolverError(ErrorCode::InconsistentObservations,
                      "sidewise overlap disagreement " + std::to_string(disagreement) + " exceeds " +
                          std::to_string(tol));

  // Assembled cross-section, then a reversed march with prescribed traces
  // carries it down to t = 0.
  std::vector<double> slice_data(static_cast<size_t>(cells + 1) * n);
  for (int j = 0; j <= cells; ++j) {
    const bool use_left = j <= reach_left[best_row];
    auto src = use_left ? from_left.field.state(best_row, j) : from_right.field.state(best_row, j);
    std::copy(src.begin(), src.end(), slice_data.begin() + static_cast<size_t>(j) * n);
  }
  Profile slice(n, sys.length, std::move(slice_data));

  const double t_bar = result.slice_time;
  ReorderedSystem ro = negate_speeds_and_reorder(sys, /*negate_sources=*/true);
  const int trace_steps = std::max(2, static_cast<int>(std::ceil(t_bar / horizon * trace_at_0.time_steps())));
  Trace rev0(n, t_bar, trace_steps), revL(n, t_bar, trace_steps);
  std::vector<double> tmp(n);
  for (int k = 0; k <= trace_steps; ++k) {
    const double t = t_bar - t_bar * k / trace_steps;
    trace_at_0.values(t, tmp);
    for (int a = 0; a < n; ++a) rev0.state(k)[a] = tmp[ro.new_to_old[a]];
    trace_at_L.values(t, tmp);
    for (int a = 0; a < n; ++a) revL.state(k)[a] = tmp[ro.new_to_old[a]];
  }
  Profile slice_rev = Profile::sample(n, sys.length, cells, [&](double x, std::span<double> out) {
    std::vector<double> s(n);
    slice.values(x, s);
    for (int a = 0; a < n; ++a) out[a] = s[ro.new_to_old[a]];
  });

  SolveOptions down_opt = options.solve;
  down_opt.time_steps.reset();
  GridField down =
      solve_forward_closure(ro.system, make_closure(ro.system, rev0, revL), slice_rev, t_bar, cells, down_opt);

  std::vector<double> initial(static_cast<size_t>(cells + 1) * n);
  for (int j = 0; j <= cells; ++j) {
    auto src = down.state(down.time_steps(), j);
    for (int i = 0; i < n; ++i) initial[static_cast<size_t>(j) * n + i] = src[ro.old_to_new[i]];
  }
  result.initial = Profile(n, sys.length, std::move(initial));
  return result;
}

ReconstructResult reconstruct_initial(const DiagonalSystem& sys, const NonlocalBC& bc, const ObservationSet& obs,
                                      double horizon, int cells, const ReconstructOptions& options) {
  const int n = sys.components;
  const int m = sys.positive_begin();
  if (sys.has_zero_speeds())
    throw SolverError(ErrorCode::ZeroEigenvalueUnsupported,
                      "trace completion needs every component moving; use the application wrapper");
  if (static_cast<int>(obs.at_0.size()) != m || static_cast<int>(obs.at_L.size()) != n - m)
    throw SolverError(ErrorCode::BadConfig, "observation count does not match the sign pattern");

  int steps = 2;
  for (const auto& s : obs.at_0) steps = std::max(steps, s.sample_count() - 1);
  for (const auto& s : obs.at_L) steps = std::max(steps, s.sample_count() - 1);

  const BcLayout lay = bc.layout();
  Trace trace0(n, horizon, steps), traceL(n, horizon, steps);
  std::vector<double> w(lay.outgoing_size()), rhs(lay.incoming_size());
  for (int k = 0; k <= steps; ++k) {
    const double t = horizon * k / steps;
    for (int i = 0; i < m; ++i) w[i] = obs.at_0[i](t);
    for (int i = m; i < n; ++i) w[m + i - m] = obs.at_L[i - m](t);
    bc.incoming(t, w, rhs);
    auto t0 = trace0.state(k);
    auto tL = traceL.state(k);
    for (int i = 0; i < m; ++i) t0[i] = w[i];
    for (int i = m; i < n; ++i) t0[i] = rhs[i - m];
    for (int i = m; i < n; ++i) tL[i] = w[m + i - m];
    for (int i = 0; i < m; ++i) tL[i] = rhs[(n - m) + i];
  }
  return reconstruct_from_traces(sys, trace0, traceL, cells, options);
}

ObservabilityRatio observability_ratio(const Profile& phi_true, const ObservationSet& obs) {
  ObservabilityRatio out;
  const double data = obs.norm_sum();
  const double state = phi_true.c1_norm();
  if (data <= 0.0) {
    if (state <= 0.0) return out;  // 0/0 convention
    out.estimate_violated = true;
    out.ratio = std::numeric_limits<double>::infinity();
    return out;
  }
  out.ratio = state / data;
  return out;
}

}  // namespace hypctrl
