#pragma once

#include <optional>
#include <vector>

#include "hypctrl/solver.hpp"

namespace hypctrl {

/// Smallest horizon the constructive method supports:
/// T* = length * max_i 1 / |speed_i(0)| over the moving components.
/// Throws SolverError(ZeroEigenvalue) when some declared-moving component has
/// speed 0 at the origin.
double min_control_time(const DiagonalSystem& sys);

struct ControlOptions {
  SolveOptions solve{};
  /// Inflation applied to length/|speed_i(0)| when sizing the trace windows,
  /// absorbing quasilinear speed variation over the admissible ball.
  double speed_margin = 1.02;
  /// Fraction of each component's free window spent on the blend; wider blends
  /// carry less curvature into the witness, the remainder is split evenly
  /// around the blend as seam margin.
  double blend_fraction = 0.8;
  /// C0 gate used by verify_control; extracted controls carry an O(dx)
  /// corner mismatch, so the forward-solve default would reject them.
  double verify_c0_tolerance = 1e-4;
};

/// Piecewise boundary trace used by synthesis: forward-solution trace up to a
/// per-component junction, quintic C1 blend, then the backward-solution trace.
/// Junctions are snapped onto the source sample grids and the blend carries
/// zero curvature at its ends, so value and one-sided slopes pass through the
/// seams without jumps.
class JoinedTrace {
 public:
  JoinedTrace(Trace forward, Trace backward, std::span<const double> junction_lo,
              std::span<const double> junction_hi);

  double value(int component, double t) const;
  double junction_lo(int component) const { return lo_[component]; }
  double junction_hi(int component) const { return hi_[component]; }
  Trace sample(int steps) const;

 private:
  Trace fwd_, bwd_;
  std::vector<double> lo_, hi_;
  std::vector<double> d_lo_, d_hi_;
};

struct ControlResult {
  /// Synthesized inhomogeneity signals, ordered like the incoming-trace
  /// vector ((n-m) at x=0 then l at x=L).
  std::vector<Signal> controls;
  GridField witness;
  double horizon_used = 0.0;
  bool coverage_ok = false;
  double initial_mismatch = 0.0;   // sup |witness(0,.) - phi|
  double final_mismatch = 0.0;     // sup |witness(T,.) - psi|
  double boundary_residual = 0.0;  // relations re-evaluated with the controls
};

/// Two-sided constructive synthesis: forward-solve from phi and backward-solve
/// from psi with zero inhomogeneity, join the full boundary trace at x=0 from
/// those solutions with per-component junction windows and a quintic C1 blend,
/// march sidewise across the interval, and read the controls off the witness.
/// Throws TimeTooShort when the windows do not fit inside [0, T] and
/// CoverageFailure when the sidewise march cannot honor the data rows.
ControlResult synthesize_controls(const DiagonalSystem& sys, const NonlocalBC& bc_template, const Profile& phi,
                                  const Profile& psi, double horizon, int cells,
                                  const ControlOptions& options = {});

struct VerifyResult {
  double final_sup_error = 0.0;
  double final_c1_error = 0.0;
  GridField field;
};

/// Forward-solves with the given controls and measures the final-state miss
/// against psi (sup norm and discrete C1 norm of the difference).
VerifyResult verify_control(const DiagonalSystem& sys, const NonlocalBC& bc_template, const Profile& phi,
                            const std::vector<Signal>& controls, const Profile& psi, double horizon, int cells,
                            const ControlOptions& options = {});

/// Boundary measurements of the outgoing components: components 0..m-1 at x=0
/// and m..n-1 at x=L, together with the inhomogeneity signals active during
/// the observation window.
struct ObservationSet {
  double horizon = 0.0;
  std::vector<Signal> at_0;
  std::vector<Signal> at_L;
  std::vector<Signal> known_inhomogeneity;

  static ObservationSet from_field(const DiagonalSystem& sys, const GridField& field, const NonlocalBC& bc);

  double norm_sum() const;
};

struct ReconstructOptions {
  SolveOptions solve{};
  /// Bound on the sidewise overlap disagreement; when unset it is derived from
  /// a half-resolution rerun (10x that difference).
  std::optional<double> agreement_tolerance;
};

struct ReconstructResult {
  Profile initial;
  double slice_time = 0.0;            // the fully covered cross-section used
  double overlap_disagreement = 0.0;  // sup difference where both marches exist
  int overlap_nodes = 0;
};

/// Recovers v(0,.) from full boundary traces: sidewise marches from both ends
/// determine a full cross-section at some interior time, and a reversed march
/// with prescribed endpoint traces carries it down to t=0.
ReconstructResult reconstruct_from_traces(const DiagonalSystem& sys, const Trace& trace_at_0,
                                          const Trace& trace_at_L, int cells,
                                          const ReconstructOptions& options = {});

/// Completes the incoming traces from the boundary relations
/// (incoming = G_in(t, observed) + H) and runs reconstruct_from_traces.
/// Requires every component to be moving (no stationary block).
ReconstructResult reconstruct_initial(const DiagonalSystem& sys, const NonlocalBC& bc, const ObservationSet& obs,
                                      double horizon, int cells, const ReconstructOptions& options = {});

struct ObservabilityRatio {
  double ratio = 0.0;
  bool estimate_violated = false;  // observations vanish but the state does not
};

/// Measured constant of the observability estimate:
/// |phi|_C1 / (sum of observation C1 norms + sum of inhomogeneity C1 norms).
/// Returns 0 for the all-zero case.
ObservabilityRatio observability_ratio(const Profile& phi_true, const ObservationSet& obs);

}  // namespace hypctrl
