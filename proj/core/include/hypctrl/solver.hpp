#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "hypctrl/grid.hpp"
#include "hypctrl/newton.hpp"
#include "hypctrl/reflect.hpp"
#include "hypctrl/system.hpp"

namespace hypctrl {

inline constexpr double kCflFactor = 0.9;
inline constexpr double kSpeedFloor = 1e-12;
inline constexpr double kDegenerateSpeedThreshold = 1e-6;

struct SolveOptions {
  double cfl = kCflFactor;
  /// Overrides the CFL-derived time step count (aligned-grid runs).
  std::optional<int> time_steps;
  /// Gate on the C0 compatibility residual of (phi, H); the C1 residual is
  /// reported, not enforced.
  double c0_tolerance = 1e-8;
  NewtonOptions newton{};
  bool enforce_admissible = true;
  int ball_samples = 128;
};

/// CFL step: cfl_factor * dx / max(eps, sup over the supplied states of
/// max_i |speed_i|), truncated to the remaining time.
double cfl_dt(const DiagonalSystem& sys, std::span<const double> slice_states, double dx,
              double remaining = std::numeric_limits<double>::infinity());

struct SolveResult {
  GridField field;
  CompatibilityReport compat;
};

/// One-endpoint view of the boundary update used by the marching schemes: the
/// interior scheme writes every outgoing/stationary entry of the new traces,
/// then `apply` fills the incoming entries (solving the nonlocal relations at
/// both endpoints simultaneously when the conditions couple them).
struct BoundaryClosure {
  std::vector<int> incoming_at_0;
  std::vector<int> incoming_at_L;
  std::function<void(double t, std::span<double> v0, std::span<double> vL)> apply;
};

BoundaryClosure make_closure(const DiagonalSystem& sys, const NonlocalBC& bc, const NewtonOptions& newton);
BoundaryClosure make_closure(const DiagonalSystem& sys, const LocalBC& bc);
/// Incoming traces read straight from given full traces (used when every
/// boundary value is already known, e.g. the reconstruction sweep).
BoundaryClosure make_closure(const DiagonalSystem& sys, const Trace& at0, const Trace& atL);

/// Forward mixed problem on R(T): first-order upwind along characteristics
/// with linear interpolation at the feet; stationary components advance by the
/// explicit source ODE; boundary relations solved each step (Newton, tol
/// 1e-12, max 50 iterations).  The initial row equals phi.
SolveResult solve_forward(const DiagonalSystem& sys, const NonlocalBC& bc, const Profile& phi, double horizon,
                          int cells, const SolveOptions& options = {});

/// Same march with an arbitrary boundary closure (enlarged/local systems,
/// prescribed traces).  No compatibility gate beyond what the closure implies.
GridField solve_forward_closure(const DiagonalSystem& sys, const BoundaryClosure& closure, const Profile& phi,
                                double horizon, int cells, const SolveOptions& options = {});

/// Cauchy problem solved on the maximum determinate domain between the curves
///   x1' = max over right-moving components of speed(v(t, x1)),   x1(0) = 0,
///   x2' = min over left-moving components of speed(v(t, x2)),    x2(0) = L,
/// marching until x1 >= x2 (or t_max when given).
struct DeterminateDomain {
  int components = 0;
  int cells = 0;
  double length = 0.0;
  double dt = 0.0;
  std::vector<double> x1, x2;                      // per row
  std::vector<int> node_lo, node_hi;               // active node range per row (lo > hi: none)
  std::vector<std::vector<double>> node_states;    // per row, layout [j - node_lo][i]
  std::vector<std::vector<double>> curve1_states;  // n-vector at x1(t_k)
  std::vector<std::vector<double>> curve2_states;  // n-vector at x2(t_k)

  int rows() const { return static_cast<int>(x1.size()); }
  double time(int k) const { return dt * k; }
  double close_time() const { return time(rows() - 1); }
  std::span<const double> state(int k, int j) const;  // j in [node_lo, node_hi]
  double sup_norm() const;
  double c1_norm() const;
};

DeterminateDomain solve_cauchy_max_domain(const DiagonalSystem& sys, const Profile& phi, int cells,
                                          const SolveOptions& options = {},
                                          std::optional<double> t_max = std::nullopt);

/// Backward mixed problem: data prescribed at t = T.  Time reversal negates
/// every speed and source and exchanges incoming/outgoing roles, so the
/// reversed boundary maps are the original relations solved for the formerly
/// outgoing traces (damped Newton).  The returned field is in the original
/// time orientation and component order.
SolveResult solve_backward(const DiagonalSystem& sys, const NonlocalBC& bc, const Profile& psi, double horizon,
                           int cells, const SolveOptions& options = {});

/// Sidewise march in x from x=0: right-moving components climb in t from the
/// bottom row, left-moving ones descend from the top row, stationary ones
/// follow their x-slope map.  With bottom and top data the field covers all of
/// R(T); without them the determined time window shrinks by one row per side
/// per level.
struct SidewiseResult {
  GridField field;
  std::vector<int> row_lo, row_hi;  // determined rows per level
  bool full = true;                 // row windows cover everything

  bool defined(int level, int row) const { return row >= row_lo[level] && row <= row_hi[level]; }
};

SidewiseResult solve_sidewise(const DiagonalSystem& sys, const Trace& trace0,
                              const std::optional<Profile>& bottom, const std::optional<Profile>& top,
                              int cells, const SolveOptions& options = {});

/// Mirror-image sidewise march from x = L (trace-only form, used by
/// reconstruction); the result is reported in original orientation.
SidewiseResult solve_sidewise_from_right(const DiagonalSystem& sys, const Trace& traceL, int cells,
                                         const SolveOptions& options = {});

/// Component permutation plus sign flips taking a system to the equivalent
/// one with negated speeds and ascending sign pattern (time reversal negates
/// sources as well, space reflection does not).
struct ReorderedSystem {
  DiagonalSystem system;
  std::vector<int> new_to_old;
  std::vector<int> old_to_new;
};
ReorderedSystem negate_speeds_and_reorder(const DiagonalSystem& sys, bool negate_sources);

struct ConvergenceRow {
  int cells = 0;
  double sup_error = 0.0;
  double observed_order = 0.0;  // NaN on the last row or degenerate data
  bool degenerate = false;      // error at rounding level; order meaningless
};

/// Final-slice errors against an exact solution, or, when `exact` is null,
/// against a 4x-refined run of the same problem.
std::vector<ConvergenceRow> convergence_study(const std::function<Profile(int cells)>& run,
                                              const SpaceFn* exact, std::span<const int> cells_list);

/// Richardson-style per-resolution error scale: sup difference of the final
/// slices of a run and its 4x-refined version at the coarse nodes.
double richardson_error(const Profile& coarse, const Profile& fine);

}  // namespace hypctrl
