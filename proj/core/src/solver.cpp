#include "hypctrl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "hypctrl/errors.hpp"

namespace hypctrl {

namespace {

constexpr double kCflSlack = 1e-9;

void check_state(std::span<const double> v, double radius, bool enforce) {
  for (double x : v) {
    if (!std::isfinite(x)) throw SolverError(ErrorCode::NonFiniteEvaluation, "field value not finite");
    if (enforce && std::abs(x) > radius * (1.0 + 1e-12))
      throw SolverError(ErrorCode::AdmissibleBallExceeded,
                        "state left the admissible ball (|v| = " + std::to_string(std::abs(x)) + ", radius " +
                            std::to_string(radius) + ")");
  }
}

// One forward-time step of the upwind/method-of-characteristics update.
// Boundary entries listed in the skip masks are left untouched for the
// boundary closure.
void advance_row(const DiagonalSystem& sys, double dt, double dx, int cells, std::span<const double> old_row,
                 std::span<double> new_row, const std::vector<char>& skip0, const std::vector<char>& skipL,
                 std::vector<double>& lam, std::vector<double>& src) {
  const int n = sys.components;
  for (int j = 0; j <= cells; ++j) {
    auto v = old_row.subspan(static_cast<size_t>(j) * n, n);
    sys.speeds(v, lam);
    sys.sources(v, src);
    for (int i = 0; i < n; ++i) {
      if (j == 0 && skip0[i]) continue;
      if (j == cells && skipL[i]) continue;
      const double xi = lam[i] * dt / dx;
      if (std::abs(xi) > 1.0 + kCflSlack)
        throw SolverError(ErrorCode::CflViolation, "characteristic foot left the cell");
      double pos = std::clamp(static_cast<double>(j) - xi, 0.0, static_cast<double>(cells));
      int base = std::min(static_cast<int>(pos), cells - 1);
      double frac = pos - base;
      const double lo = old_row[(static_cast<size_t>(base)) * n + i];
      const double hi = old_row[(static_cast<size_t>(base) + 1) * n + i];
      new_row[static_cast<size_t>(j) * n + i] = lo + frac * (hi - lo) + dt * src[i];
    }
  }
}

std::vector<char> skip_mask(int n, std::span<const int> indices) {
  std::vector<char> mask(n, 0);
  for (int i : indices) mask[i] = 1;
  return mask;
}

Profile resample(const Profile& p, int cells) {
  if (p.cells() == cells) return p;
  return Profile::sample(p.components(), p.length(), cells,
                         [&p](double x, std::span<double> out) { p.values(x, out); });
}

}  // namespace

double cfl_dt(const DiagonalSystem& sys, std::span<const double> slice_states, double dx, double remaining) {
  if (dx <= 0.0) throw SolverError(ErrorCode::BadConfig, "cfl_dt: dx must be positive");
  double bound = sys.max_speed(slice_states);
  double dt = kCflFactor * dx / std::max(bound, kSpeedFloor);
  return std::min(dt, remaining);
}

BoundaryClosure make_closure(const DiagonalSystem& sys, const NonlocalBC& bc, const NewtonOptions& newton) {
  (void)sys;
  BoundaryClosure closure;
  const BcLayout lay = bc.layout();
  for (int i = lay.m; i < lay.n; ++i) closure.incoming_at_0.push_back(i);
  for (int i = 0; i < lay.l; ++i) closure.incoming_at_L.push_back(i);

  closure.apply = [bc, lay, newton](double t, std::span<double> v0, std::span<double> vL) {
    std::vector<double> w(lay.outgoing_size()), rhs(lay.incoming_size()), z(lay.incoming_size());
    lay.gather_outgoing(v0, vL, w);
    bc.incoming(t, w, rhs);
    // The relations are solved for the incoming-trace vector at both endpoints
    // simultaneously; with the outgoing traces already advanced the residual
    // z - rhs is linear in z, so the damped Newton settles in one step.
    lay.gather_incoming(v0, vL, z);
    auto residual = [&](std::span<const double> zz, std::span<double> out) {
      for (size_t i = 0; i < zz.size(); ++i) out[i] = zz[i] - rhs[i];
    };
    auto identity = [](std::span<const double> zz, std::span<double> out) {
      std::fill(out.begin(), out.end(), 0.0);
      for (size_t i = 0; i < zz.size(); ++i) out[i * zz.size() + i] = 1.0;
    };
    newton_solve(z, residual, identity, newton);
    lay.scatter_incoming(z, v0, vL);
  };
  return closure;
}

BoundaryClosure make_closure(const DiagonalSystem& sys, const LocalBC& bc) {
  (void)sys;
  BoundaryClosure closure;
  closure.incoming_at_0 = bc.incoming_at_0;
  closure.incoming_at_L = bc.incoming_at_L;
  auto at0 = bc.apply_at_0;
  auto atL = bc.apply_at_L;
  closure.apply = [at0, atL](double t, std::span<double> v0, std::span<double> vL) {
    at0(t, v0);
    atL(t, vL);
  };
  return closure;
}

BoundaryClosure make_closure(const DiagonalSystem& sys, const Trace& at0, const Trace& atL) {
  BoundaryClosure closure;
  for (int i = sys.positive_begin(); i < sys.components; ++i) closure.incoming_at_0.push_back(i);
  for (int i = 0; i < sys.negative; ++i) closure.incoming_at_L.push_back(i);
  auto inc0 = closure.incoming_at_0;
  auto incL = closure.incoming_at_L;
  closure.apply = [at0, atL, inc0, incL](double t, std::span<double> v0, std::span<double> vL) {
    std::vector<double> buf(v0.size());
    at0.values(t, buf);
    for (int i : inc0) v0[i] = buf[i];
    atL.values(t, buf);
    for (int i : incL) vL[i] = buf[i];
  };
  return closure;
}

GridField solve_forward_closure(const DiagonalSystem& sys, const BoundaryClosure& closure, const Profile& phi,
                                double horizon, int cells, const SolveOptions& options) {
  const int n = sys.components;
  const double dx = sys.length / cells;

  Profile row0 = resample(phi, cells);
  double bound = std::max(sys.max_speed(row0.data()), sys.max_speed_in_ball(options.ball_samples));
  double dt_limit = options.cfl * dx / std::max(bound, kSpeedFloor);
  int steps = options.time_steps.value_or(std::max(1, static_cast<int>(std::ceil(horizon / dt_limit - 1e-12))));

  GridField field(n, horizon, sys.length, steps, cells);
  field.set_row(0, phi);
  const double dt = field.dt();

  for (int j = 0; j <= cells; ++j) check_state(field.state(0, j), sys.radius, options.enforce_admissible);

  auto skip0 = skip_mask(n, closure.incoming_at_0);
  auto skipL = skip_mask(n, closure.incoming_at_L);
  std::vector<double> lam(n), src(n);

  for (int k = 0; k < steps; ++k) {
    advance_row(sys, dt, dx, cells, field.row(k), field.row(k + 1), skip0, skipL, lam, src);
    closure.apply(field.time(k + 1), field.state(k + 1, 0), field.state(k + 1, cells));
    for (int j = 0; j <= cells; ++j) check_state(field.state(k + 1, j), sys.radius, options.enforce_admissible);
  }
  return field;
}

SolveResult solve_forward(const DiagonalSystem& sys, const NonlocalBC& bc, const Profile& phi, double horizon,
                          int cells, const SolveOptions& options) {
  Profile sampled = resample(phi, cells);
  CompatibilityReport compat = check_compatibility(sys, bc, sampled, 1);
  if (compat.max_c0() > options.c0_tolerance)
    throw SolverError(ErrorCode::IncompatibleData,
                      "C0 compatibility residual " + std::to_string(compat.max_c0()) + " exceeds " +
                          std::to_string(options.c0_tolerance));
  BoundaryClosure closure = make_closure(sys, bc, options.newton);
  GridField field = solve_forward_closure(sys, closure, phi, horizon, cells, options);
  return {std::move(field), std::move(compat)};
}

std::span<const double> DeterminateDomain::state(int k, int j) const {
  return {&node_states[k][static_cast<size_t>(j - node_lo[k]) * components], static_cast<size_t>(components)};
}

double DeterminateDomain::sup_norm() const {
  double sup = 0.0;
  for (const auto& row : node_states)
    for (double v : row) sup = std::max(sup, std::abs(v));
  for (const auto& row : curve1_states)
    for (double v : row) sup = std::max(sup, std::abs(v));
  for (const auto& row : curve2_states)
    for (double v : row) sup = std::max(sup, std::abs(v));
  return sup;
}

double DeterminateDomain::c1_norm() const {
  double result = sup_norm();
  const double dx = length / cells;
  for (int k = 0; k < rows(); ++k) {
    for (int j = node_lo[k]; j < node_hi[k]; ++j)
      for (int i = 0; i < components; ++i)
        result = std::max(result, std::abs(state(k, j + 1)[i] - state(k, j)[i]) / dx);
    if (k + 1 < rows())
      for (int j = std::max(node_lo[k], node_lo[k + 1]); j <= std::min(node_hi[k], node_hi[k + 1]); ++j)
        for (int i = 0; i < components; ++i)
          result = std::max(result, std::abs(state(k + 1, j)[i] - state(k, j)[i]) / dt);
  }
  return result;
}

DeterminateDomain solve_cauchy_max_domain(const DiagonalSystem& sys, const Profile& phi, int cells,
                                          const SolveOptions& options, std::optional<double> t_max) {
  const int n = sys.components;
  const double dx = sys.length / cells;
  Profile row0 = resample(phi, cells);

  const bool has_pos = sys.positive() > 0;
  const bool has_neg = sys.negative > 0;
  {
    std::vector<double> lam(n), origin(n, 0.0);
    sys.speeds(origin, lam);
    double closing = (has_pos ? lam[n - 1] : 0.0) + (has_neg ? -lam[0] : 0.0);
    // crude: use the extreme components at the origin as the closing-speed scale
    double max_pos = 0.0, max_neg = 0.0;
    for (int i = 0; i < n; ++i) {
      if (sys.is_positive(i)) max_pos = std::max(max_pos, lam[i]);
      if (sys.is_negative(i)) max_neg = std::max(max_neg, -lam[i]);
    }
    closing = max_pos + max_neg;
    if (closing <= kSpeedFloor && !t_max)
      throw SolverError(ErrorCode::DomainNeverCloses, "domain curves are static; pass t_max");
  }

  double bound = std::max(sys.max_speed(row0.data()), sys.max_speed_in_ball(options.ball_samples));
  const double dt = options.cfl * dx / std::max(bound, kSpeedFloor);

  DeterminateDomain dom;
  dom.components = n;
  dom.cells = cells;
  dom.length = sys.length;
  dom.dt = dt;

  dom.x1.push_back(0.0);
  dom.x2.push_back(sys.length);
  dom.node_lo.push_back(0);
  dom.node_hi.push_back(cells);
  dom.node_states.emplace_back(row0.data().begin(), row0.data().end());
  dom.curve1_states.emplace_back(row0.state(0).begin(), row0.state(0).end());
  dom.curve2_states.emplace_back(row0.state(cells).begin(), row0.state(cells).end());

  std::vector<double> lam(n), src(n);
  const size_t row_cap = 4096 * 64;  // hard stop against runaway marches

  while (true) {
    const int k = dom.rows() - 1;
    if (t_max && dom.time(k) >= *t_max - 1e-15) break;
    if (dom.x1[k] >= dom.x2[k]) break;
    if (dom.node_states.size() > row_cap)
      throw SolverError(ErrorCode::DomainNeverCloses, "determinate domain march exceeded the row budget");

    sys.speeds(dom.curve1_states[k], lam);
    double slope1 = 0.0;
    for (int i = 0; i < n; ++i)
      if (sys.is_positive(i)) slope1 = std::max(slope1, lam[i]);
    sys.speeds(dom.curve2_states[k], lam);
    double slope2 = 0.0;
    for (int i = 0; i < n; ++i)
      if (sys.is_negative(i)) slope2 = std::min(slope2, lam[i]);

    double x1n = dom.x1[k] + dt * slope1;
    double x2n = dom.x2[k] + dt * slope2;
    if (x1n >= x2n) break;

    const double x1o = dom.x1[k], x2o = dom.x2[k];
    const int lo_old = dom.node_lo[k], hi_old = dom.node_hi[k];
    const auto& old_nodes = dom.node_states[k];
    const auto& c1_old = dom.curve1_states[k];
    const auto& c2_old = dom.curve2_states[k];

    auto value_at = [&](int i, double pos) -> double {
      pos = std::clamp(pos, x1o, x2o);
      if (lo_old > hi_old) {  // only the two curve points carry data
        double span = std::max(x2o - x1o, 1e-300);
        double f = (pos - x1o) / span;
        return c1_old[i] + f * (c2_old[i] - c1_old[i]);
      }
      double first = lo_old * dx, last = hi_old * dx;
      if (pos <= first) {
        double span = first - x1o;
        if (span <= 1e-300) return old_nodes[static_cast<size_t>(0) * n + i];
        double f = (pos - x1o) / span;
        return c1_old[i] + f * (old_nodes[static_cast<size_t>(0) * n + i] - c1_old[i]);
      }
      if (pos >= last) {
        double span = x2o - last;
        if (span <= 1e-300) return old_nodes[static_cast<size_t>(hi_old - lo_old) * n + i];
        double f = (pos - last) / span;
        const double v = old_nodes[static_cast<size_t>(hi_old - lo_old) * n + i];
        return v + f * (c2_old[i] - v);
      }
      double rel = pos / dx - lo_old;
      int base = std::min(static_cast<int>(rel), hi_old - lo_old - 1);
      double frac = rel - base;
      const double a = old_nodes[static_cast<size_t>(base) * n + i];
      const double b = old_nodes[static_cast<size_t>(base + 1) * n + i];
      return a + frac * (b - a);
    };

    auto advance_point = [&](std::span<const double> base_state, double new_pos, std::span<double> out) {
      sys.speeds(base_state, lam);
      sys.sources(base_state, src);
      for (int i = 0; i < n; ++i) {
        const double xi = lam[i] * dt;
        if (std::abs(xi) > dx * (1.0 + kCflSlack))
          throw SolverError(ErrorCode::CflViolation, "characteristic foot left the cell");
        out[i] = value_at(i, new_pos - xi) + dt * src[i];
      }
      check_state(out, sys.radius, options.enforce_admissible);
    };

    int lo_new = std::max(0, static_cast<int>(std::ceil(x1n / dx - 1e-12)));
    int hi_new = std::min(cells, static_cast<int>(std::floor(x2n / dx + 1e-12)));

    std::vector<double> new_nodes(lo_new <= hi_new ? static_cast<size_t>(hi_new - lo_new + 1) * n : 0);
    std::vector<double> c1_new(n), c2_new(n);
    for (int j = lo_new; j <= hi_new; ++j) {
      std::vector<double> base(n);
      for (int i = 0; i < n; ++i) base[i] = value_at(i, j * dx);
      advance_point(base, j * dx, std::span<double>(&new_nodes[static_cast<size_t>(j - lo_new) * n], n));
    }
    advance_point(c1_old, x1n, c1_new);
    advance_point(c2_old, x2n, c2_new);

    dom.x1.push_back(x1n);
    dom.x2.push_back(x2n);
    dom.node_lo.push_back(lo_new);
    dom.node_hi.push_back(hi_new);
    dom.node_states.push_back(std::move(new_nodes));
    dom.curve1_states.push_back(std::move(c1_new));
    dom.curve2_states.push_back(std::move(c2_new));
  }
  return dom;
}

namespace {

thread_local std::vector<double> tl_state, tl_eval;

}  // namespace

ReorderedSystem negate_speeds_and_reorder(const DiagonalSystem& sys, bool negate_sources) {
  const int n = sys.components;
  const int l = sys.negative;
  const int m = sys.positive_begin();

  ReorderedSystem ro;
  auto& order = ro.new_to_old;
  for (int r = m; r < n; ++r) order.push_back(r);  // formerly positive -> now negative
  for (int q = l; q < m; ++q) order.push_back(q);  // stationary stays stationary
  for (int p = 0; p < l; ++p) order.push_back(p);  // formerly negative -> now positive
  ro.old_to_new.assign(n, 0);
  for (int a = 0; a < n; ++a) ro.old_to_new[order[a]] = a;

  DiagonalSystem& out = ro.system;
  out.components = n;
  out.negative = n - m;
  out.zero = m - l;
  out.radius = sys.radius;
  out.length = sys.length;
  out.source_free = sys.source_free;

  auto order_copy = order;
  auto wrap = [order_copy, n](const StateFn& fn, double sign) -> StateFn {
    if (!fn) return nullptr;
    return [order_copy, n, fn, sign](std::span<const double> v, std::span<double> res) {
      tl_state.resize(n);
      tl_eval.resize(n);
      for (int a = 0; a < n; ++a) tl_state[order_copy[a]] = v[a];
      fn(tl_state, tl_eval);
      for (int a = 0; a < n; ++a) res[a] = sign * tl_eval[order_copy[a]];
    };
  };
  out.speeds = wrap(sys.speeds, -1.0);
  out.sources = wrap(sys.sources, negate_sources ? -1.0 : 1.0);
  // Time reversal leaves x-slopes alone; the space-reflection caller negates.
  out.zero_x_slope = wrap(sys.zero_x_slope, 1.0);
  return ro;
}

SolveResult solve_backward(const DiagonalSystem& sys, const NonlocalBC& bc, const Profile& psi, double horizon,
                           int cells, const SolveOptions& options) {
  const int n = sys.components;
  const int l = sys.negative;
  const int m = sys.positive_begin();
  const BcLayout lay = bc.layout();

  ReorderedSystem ro = negate_speeds_and_reorder(sys, /*negate_sources=*/true);
  const BcLayout rev_lay{n, n - m, n - l};

  // Reversed boundary maps: the original relations solved for the formerly
  // outgoing traces.  Unknowns are components 0..l-1 at x=0 and m..n-1 at x=L;
  // every other trace entry arrives through the reversed outgoing vector.
  auto seed = std::make_shared<std::vector<double>>(static_cast<size_t>(lay.incoming_size()), 0.0);
  auto order = ro.new_to_old;
  NewtonOptions newton = options.newton;

  auto rhs_rev = [bc, lay, order, horizon, seed, newton, n, l, m](double tau, std::span<const double> w_rev,
                                                                  std::span<double> out) {
    const double t = horizon - tau;
    const BcLayout rlay{n, n - m, n - l};
    // Known traces in original component indexing.
    std::vector<double> known0(n, 0.0), knownL(n, 0.0);
    {
      int idx = 0;
      for (int a = 0; a < rlay.m; ++a) known0[order[a]] = w_rev[idx++];
      for (int a = rlay.l; a < n; ++a) knownL[order[a]] = w_rev[idx++];
    }
    std::vector<double> z_known(lay.incoming_size());
    {
      int idx = 0;
      for (int i = m; i < n; ++i) z_known[idx++] = known0[i];
      for (int i = 0; i < l; ++i) z_known[idx++] = knownL[i];
    }
    std::vector<double> w_old(lay.outgoing_size());
    auto fill_w = [&](std::span<const double> u) {
      int idx = 0;
      for (int i = 0; i < m; ++i) w_old[idx++] = i < l ? u[i] : known0[i];
      for (int i = l; i < n; ++i) w_old[idx++] = i < m ? knownL[i] : u[l + i - m];
    };
    std::vector<double> rhs(lay.incoming_size());
    auto residual = [&](std::span<const double> u, std::span<double> res) {
      fill_w(u);
      bc.incoming(t, w_old, rhs);
      for (int i = 0; i < lay.incoming_size(); ++i) res[i] = z_known[i] - rhs[i];
    };
    std::vector<double> u = *seed;
    try {
      newton_solve(u, residual, nullptr, newton);
    } catch (const SolverError& e) {
      if (e.code() == ErrorCode::NewtonDivergence) {
        // retry cold in case the warm start sat in a bad basin
        std::fill(u.begin(), u.end(), 0.0);
        newton_solve(u, residual, nullptr, newton);
      } else {
        throw;
      }
    }
    *seed = u;
    // Reversed incoming layout: formerly-negative components at x=0 (ascending)
    // then formerly-positive components at x=L.
    for (int i = 0; i < l; ++i) out[i] = u[i];
    for (int i = m; i < n; ++i) out[l + i - m] = u[l + i - m];
  };

  NonlocalBC bc_rev = NonlocalBC::from_rhs(rev_lay, rhs_rev, {});

  Profile psi_s = resample(psi, cells);
  auto order_copy = ro.new_to_old;
  Profile psi_rev = Profile::sample(n, sys.length, cells, [&psi_s, &order_copy, n](double x, std::span<double> out) {
    std::vector<double> tmp(n);
    psi_s.values(x, tmp);
    for (int a = 0; a < n; ++a) out[a] = tmp[order_copy[a]];
  });

  SolveResult rev = solve_forward(ro.system, bc_rev, psi_rev, horizon, cells, options);

  GridField field(n, horizon, sys.length, rev.field.time_steps(), cells);
  for (int k = 0; k <= field.time_steps(); ++k)
    for (int j = 0; j <= cells; ++j) {
      auto src = rev.field.state(rev.field.time_steps() - k, j);
      auto dst = field.state(k, j);
      for (int i = 0; i < n; ++i) dst[i] = src[ro.old_to_new[i]];
    }
  return {std::move(field), std::move(rev.compat)};
}

SidewiseResult solve_sidewise(const DiagonalSystem& sys, const Trace& trace0, const std::optional<Profile>& bottom,
                              const std::optional<Profile>& top, int cells, const SolveOptions& options) {
  const int n = sys.components;
  const double horizon = trace0.horizon();
  const double dx = sys.length / cells;

  if (sys.has_zero_speeds() && !sys.zero_x_slope)
    throw SolverError(ErrorCode::ZeroEigenvalueUnsupported,
                      "sidewise march needs an x-slope map for stationary components");
  double min_speed = sys.min_nonzero_speed_in_ball(options.ball_samples);
  if (!(min_speed >= kDegenerateSpeedThreshold))
    throw SolverError(ErrorCode::DegenerateSpeed,
                      "characteristic speed below threshold: " + std::to_string(min_speed));

  int steps;
  if (options.time_steps) {
    steps = *options.time_steps;
  } else {
    double dt_raw = dx / (min_speed * options.cfl);
    steps = std::max(2, static_cast<int>(std::floor(horizon / dt_raw)));
  }

  SidewiseResult res;
  res.field = GridField(n, horizon, sys.length, steps, cells);
  GridField& f = res.field;
  const double dt = f.dt();

  const bool has_pos = sys.positive() > 0;
  const bool has_neg = sys.negative > 0;
  const bool shrink_lo = has_pos && !bottom.has_value();
  const bool shrink_hi = has_neg && !top.has_value();
  res.full = !shrink_lo && !shrink_hi;

  res.row_lo.assign(cells + 1, 0);
  res.row_hi.assign(cells + 1, steps);

  for (int k = 0; k <= steps; ++k) trace0.values(f.time(k), f.state(k, 0));
  for (int k = 0; k <= steps; ++k) check_state(f.state(k, 0), sys.radius, options.enforce_admissible);

  std::vector<double> lam(n), src(n), slope(n);

  for (int j = 0; j < cells; ++j) {
    const int lo_old = res.row_lo[j], hi_old = res.row_hi[j];
    int lo_new = lo_old + (shrink_lo ? 1 : 0);
    int hi_new = hi_old - (shrink_hi ? 1 : 0);
    if (lo_new > hi_new) {  // determined window exhausted
      for (int jj = j + 1; jj <= cells; ++jj) {
        res.row_lo[jj] = steps + 1;
        res.row_hi[jj] = -1;
      }
      break;
    }
    res.row_lo[j + 1] = lo_new;
    res.row_hi[j + 1] = hi_new;
    const double x_next = f.node(j + 1);

    if (bottom)
      for (int i = sys.positive_begin(); i < n; ++i) f.at(0, j + 1, i) = bottom->value(i, x_next);
    if (top)
      for (int i = 0; i < sys.negative; ++i) f.at(steps, j + 1, i) = top->value(i, x_next);

    auto interp_row = [&](int i, double pos) -> double {
      pos = std::clamp(pos, static_cast<double>(lo_old), static_cast<double>(hi_old));
      int base = std::min(static_cast<int>(pos), hi_old - 1);
      base = std::max(base, lo_old);
      double frac = pos - base;
      const double a = f.at(base, j, i);
      const double b = f.at(std::min(base + 1, hi_old), j, i);
      return a + frac * (b - a);
    };

    for (int k = lo_new; k <= hi_new; ++k) {
      auto v = f.state(k, j);
      sys.speeds(v, lam);
      sys.sources(v, src);
      if (sys.zero_x_slope) sys.zero_x_slope(v, slope);
      for (int i = 0; i < n; ++i) {
        if (sys.is_zero(i)) {
          f.at(k, j + 1, i) = v[i] + dx * slope[i];
          continue;
        }
        if (k == 0 && bottom && sys.is_positive(i)) continue;
        if (k == steps && top && sys.is_negative(i)) continue;
        if (std::abs(lam[i]) < kDegenerateSpeedThreshold)
          throw SolverError(ErrorCode::DegenerateSpeed, "characteristic speed collapsed during march");
        const double offset = dx / (lam[i] * dt);  // rows per level
        if (std::abs(offset) > 1.0 + kCflSlack)
          throw SolverError(ErrorCode::CflViolation, "sidewise characteristic foot left the cell");
        f.at(k, j + 1, i) = interp_row(i, k - offset) + dx * src[i] / lam[i];
      }
    }
    for (int k = lo_new; k <= hi_new; ++k)
      check_state(f.state(k, j + 1), sys.radius, options.enforce_admissible);
  }
  return res;
}

SidewiseResult solve_sidewise_from_right(const DiagonalSystem& sys, const Trace& traceL, int cells,
                                         const SolveOptions& options) {
  const int n = sys.components;
  ReorderedSystem ro = negate_speeds_and_reorder(sys, /*negate_sources=*/false);
  if (ro.system.zero_x_slope) {
    auto base = ro.system.zero_x_slope;
    ro.system.zero_x_slope = [base, n](std::span<const double> v, std::span<double> out) {
      base(v, out);
      for (int i = 0; i < n; ++i) out[i] = -out[i];
    };
  }
  Trace reflected(n, traceL.horizon(), traceL.time_steps());
  for (int k = 0; k <= traceL.time_steps(); ++k) {
    auto src = traceL.state(k);
    auto dst = reflected.state(k);
    for (int a = 0; a < n; ++a) dst[a] = src[ro.new_to_old[a]];
  }
  SidewiseResult mirrored = solve_sidewise(ro.system, reflected, std::nullopt, std::nullopt, cells, options);

  SidewiseResult out;
  out.full = mirrored.full;
  out.field = GridField(n, mirrored.field.horizon(), sys.length, mirrored.field.time_steps(), cells);
  out.row_lo.assign(cells + 1, 0);
  out.row_hi.assign(cells + 1, 0);
  for (int j = 0; j <= cells; ++j) {
    out.row_lo[j] = mirrored.row_lo[cells - j];
    out.row_hi[j] = mirrored.row_hi[cells - j];
    for (int k = 0; k <= out.field.time_steps(); ++k) {
      auto src = mirrored.field.state(k, cells - j);
      auto dst = out.field.state(k, j);
      for (int i = 0; i < n; ++i) dst[i] = src[ro.old_to_new[i]];
    }
  }
  return out;
}

std::vector<ConvergenceRow> convergence_study(const std::function<Profile(int cells)>& run, const SpaceFn* exact,
                                              std::span<const int> cells_list) {
  std::vector<ConvergenceRow> table;
  std::optional<Profile> reference;
  if (!exact) {
    int finest = *std::max_element(cells_list.begin(), cells_list.end());
    reference = run(4 * finest);
  }
  for (int cells : cells_list) {
    Profile final_slice = run(cells);
    double err = 0.0;
    std::vector<double> tmp(final_slice.components());
    for (int j = 0; j <= final_slice.cells(); ++j) {
      double x = final_slice.node(j);
      if (exact)
        (*exact)(x, tmp);
      else
        reference->values(x, tmp);
      auto v = final_slice.state(j);
      for (int i = 0; i < final_slice.components(); ++i) err = std::max(err, std::abs(v[i] - tmp[i]));
    }
    table.push_back({cells, err, std::numeric_limits<double>::quiet_NaN(), err < 1e-14});
  }
  for (size_t r = 0; r + 1 < table.size(); ++r) {
    if (table[r].degenerate || table[r + 1].degenerate) continue;
    double ratio = table[r].sup_error / table[r + 1].sup_error;
    table[r].observed_order = std::log(ratio) / std::log(static_cast<double>(table[r + 1].cells) / table[r].cells);
  }
  return table;
}

double richardson_error(const Profile& coarse, const Profile& fine) {
  double err = 0.0;
  std::vector<double> tmp(coarse.components());
  for (int j = 0; j <= coarse.cells(); ++j) {
    fine.values(coarse.node(j), tmp);
    auto v = coarse.state(j);
    for (int i = 0; i < coarse.components(); ++i) err = std::max(err, std::abs(v[i] - tmp[i]));
  }
  return err;
}

}  // namespace hypctrl
