#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hypctrl/grid.hpp"
#include "hypctrl/signal.hpp"

namespace hypctrl {

/// Evaluates a componentwise map of the state vector v into `out`.
using StateFn = std::function<void(std::span<const double> v, std::span<double> out)>;

/// First-order quasilinear hyperbolic system in characteristic (diagonal)
/// variables:
///
///   d v_i / dt + speed_i(v) d v_i / dx = source_i(v),   i = 0..n-1,
///
/// on the interval [0, length].  Components are ordered by the sign of their
/// characteristic speed: indices [0, negative) travel left (speed < 0),
/// [negative, negative+zero) are stationary (speed == 0) and the rest travel
/// right (speed > 0).  The sign pattern must hold on the whole admissible ball
/// |v|_inf <= radius; solvers abort when a state leaves that ball.
struct DiagonalSystem {
  int components = 0;
  int negative = 0;  // count of speed<0 components (the paper's l)
  int zero = 0;      // count of speed==0 components (m - l)
  StateFn speeds;
  StateFn sources;
  double radius = 1.0;
  double length = 1.0;

  /// True when sources vanish identically; enables the sharp per-component
  /// junction windows in control synthesis.
  bool source_free = false;

  /// Optional x-slope map for stationary components: d v_q / dx = slope_q(v).
  /// Required by sidewise solves when zero > 0 (e.g. the wave displacement,
  /// whose x-derivative is recoverable from the state).
  StateFn zero_x_slope;

  int zero_begin() const { return negative; }          // first stationary index
  int positive_begin() const { return negative + zero; }  // the paper's m
  int positive() const { return components - negative - zero; }
  bool is_negative(int i) const { return i < negative; }
  bool is_zero(int i) const { return i >= negative && i < positive_begin(); }
  bool is_positive(int i) const { return i >= positive_begin(); }
  bool has_zero_speeds() const { return zero > 0; }

  /// Sup over the given states (plus the origin) of max_i |speed_i|.
  double max_speed(std::span<const double> flat_states) const;
  /// Sampled sup of max_i |speed_i| over the admissible ball.
  double max_speed_in_ball(int samples = 128) const;
  /// Sampled inf of min_i |speed_i| over nonzero components of the ball.
  double min_nonzero_speed_in_ball(int samples = 128) const;
};

/// Index bookkeeping for the nonlocal boundary relations.
///
/// The outgoing/known trace vector is
///   w = (v_0(t,0), .., v_{m-1}(t,0), v_l(t,L), .., v_{n-1}(t,L)),
/// and the incoming/prescribed vector is
///   z = (v_m(t,0), .., v_{n-1}(t,0), v_0(t,L), .., v_{l-1}(t,L)),
/// with l = negative and m = negative + zero, both in ascending component
/// order.
struct BcLayout {
  int n = 0, l = 0, m = 0;

  int outgoing_size() const { return m + (n - l); }
  int incoming_size() const { return (n - m) + l; }

  void gather_outgoing(std::span<const double> v0, std::span<const double> vL, std::span<double> w) const;
  void gather_incoming(std::span<const double> v0, std::span<const double> vL, std::span<double> z) const;
  void scatter_incoming(std::span<const double> z, std::span<double> v0, std::span<double> vL) const;
};

/// Nonlocal boundary conditions coupling the traces at x=0 and x=L:
/// incoming = G_in(t, w) + H(t) with G_in(t, 0) = 0.
///
/// Scenario builders may supply the combined right side directly (the
/// Saint-Venant and wave maps are implicit and solved by an inner Newton, so
/// splitting off H would double the work); the inhomogeneity signals are kept
/// alongside for norm reporting and control extraction.
class NonlocalBC {
 public:
  using RhsFn = std::function<void(double t, std::span<const double> w, std::span<double> out)>;
  /// Row-major d(rhs)/dw, size incoming_size x outgoing_size.
  using JacFn = std::function<void(double t, std::span<const double> w, std::span<double> out)>;

  NonlocalBC() = default;

  /// Homogeneous map plus explicit inhomogeneity signals.
  static NonlocalBC from_parts(BcLayout layout, RhsFn g_in, std::vector<Signal> inhomogeneity,
                               JacFn jacobian = nullptr);
  /// Right side with the inhomogeneity already folded in; `signals` are kept
  /// for reporting only and may use any natural parametrization.
  static NonlocalBC from_rhs(BcLayout layout, RhsFn rhs, std::vector<Signal> signals, JacFn jacobian = nullptr);

  const BcLayout& layout() const { return layout_; }

  /// Full right side of the incoming-trace relations at time t.
  void incoming(double t, std::span<const double> w, std::span<double> out) const;

  /// d(incoming)/dw; analytic when provided, otherwise central finite
  /// differences with step 1e-6 * max(1, |w|_inf).
  void jacobian(double t, std::span<const double> w, std::span<double> out) const;

  std::span<const Signal> signals() const { return signals_; }
  /// Reporting signals plus any inhomogeneity stacked by with_inhomogeneity.
  std::vector<Signal> collected_signals() const;
  double signals_c1_norm_sum() const;

  /// Same homogeneous map with new inhomogeneity signals added on top
  /// (ordered like the incoming vector).
  NonlocalBC with_inhomogeneity(std::vector<Signal> h) const;

 private:
  BcLayout layout_;
  RhsFn g_in_;                   // homogeneous part (from_parts only)
  RhsFn rhs_;                    // combined right side
  JacFn jac_;
  std::vector<Signal> signals_;
  std::vector<Signal> added_;    // inhomogeneity applied on top of rhs_
};

/// Coordinate change between physical variables and the diagonal variables the
/// solvers work in.
struct PhysicalChart {
  int physical_dim = 0;
  int diagonal_dim = 0;
  StateFn to_diag;
  StateFn from_diag;
  std::vector<double> equilibrium;  // physical point mapped to v = 0

  /// max |from_diag(to_diag(u)) - u|_inf over diagonal-ball samples.
  double round_trip_error(double radius, int samples = 100) const;
};

struct ValidationIssue {
  enum class Kind { SourceAtZero, SignPattern, Continuity };
  Kind kind;
  int component;
  std::vector<double> state;
  double value;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  int samples_checked = 0;
  bool valid() const { return issues.empty(); }
};

/// Checks source(0) = 0 and the speed sign pattern at quasi-random points of
/// the admissible ball, plus a crude sampled-continuity probe.  Throws
/// SolverError(NonFiniteEvaluation) if speeds or sources return NaN/inf.
ValidationReport validate_system(const DiagonalSystem& sys, int samples);

/// Residual magnitudes of the boundary relations (and their first time
/// derivative) at the corners (t,x) = (0,0) and (0,L).  Entries follow the
/// incoming-vector layout: at0 holds components m..n-1, atL holds 0..l-1.
struct CompatibilityReport {
  std::vector<double> c0_at0, c0_atL;
  std::vector<double> c1_at0, c1_atL;
  double max_c0() const;
  double max_c1() const;
};

/// order 0 checks the boundary identities on the initial profile; order 1 also
/// differentiates them in t, expressing trace time derivatives through the PDE.
/// Throws SolverError(GridTooCoarse) when phi has fewer than 3 nodes.
CompatibilityReport check_compatibility(const DiagonalSystem& sys, const NonlocalBC& bc, const Profile& phi,
                                        int order);

/// Discrete C1 norms (free-function forms).
double c1_norm(const Signal& s);
double c1_norm(const Profile& p);
double c1_norm(const GridField& f);

}  // namespace hypctrl
