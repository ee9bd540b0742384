#pragma once

#include <functional>
#include <span>
#include <vector>

namespace hypctrl {

/// Evaluates all n components of a space profile at x.
using SpaceFn = std::function<void(double x, std::span<double> out)>;

/// n-component function of x sampled uniformly on [0, L], with optional
/// analytic evaluator kept for exact resampling on other grids.
class Profile {
 public:
  Profile() = default;
  Profile(int components, double length, std::vector<double> data);

  static Profile zero(int components, double length, int cells);
  static Profile sample(int components, double length, int cells, const SpaceFn& f);
  /// Keeps `f` so value() stays exact off the sample grid.
  static Profile analytic(int components, double length, int cells, SpaceFn f);

  int components() const { return components_; }
  int cells() const { return cells_; }  // Nx: nodes are 0..Nx
  double length() const { return length_; }
  double dx() const { return length_ / cells_; }
  double node(int j) const { return length_ * j / cells_; }

  std::span<double> state(int j);
  std::span<const double> state(int j) const;

  /// Component value at arbitrary x in [0, L] (analytic or linear interpolation).
  double value(int component, double x) const;
  void values(double x, std::span<double> out) const;

  /// One-sided difference quotient toward the interior at node j.
  double one_sided_derivative(int component, int j) const;

  double sup_norm() const;
  double c1_norm() const;

  std::span<const double> data() const { return data_; }

 private:
  int components_ = 0;
  int cells_ = 0;
  double length_ = 0.0;
  std::vector<double> data_;  // layout [j][i]
  SpaceFn fn_;
};

/// Space-time sampled n-component field v_i(t_k, x_j) on the uniform grid over
/// R(T) = [0,T] x [0,L].  Layout is row-major in (k, j, i).
class GridField {
 public:
  GridField() = default;
  GridField(int components, double horizon, double length, int time_steps, int cells);

  int components() const { return components_; }
  int time_steps() const { return time_steps_; }  // Nt: rows are 0..Nt
  int cells() const { return cells_; }            // Nx: columns are 0..Nx
  double horizon() const { return horizon_; }
  double length() const { return length_; }
  double dt() const { return horizon_ / time_steps_; }
  double dx() const { return length_ / cells_; }
  double time(int k) const { return horizon_ * k / time_steps_; }
  double node(int j) const { return length_ * j / cells_; }

  double& at(int k, int j, int i) { return data_[(static_cast<size_t>(k) * (cells_ + 1) + j) * components_ + i]; }
  double at(int k, int j, int i) const {
    return data_[(static_cast<size_t>(k) * (cells_ + 1) + j) * components_ + i];
  }
  std::span<double> state(int k, int j);
  std::span<const double> state(int k, int j) const;
  std::span<double> row(int k);
  std::span<const double> row(int k) const;

  Profile slice(int k) const;
  void set_row(int k, const Profile& p);

  /// Row order reversed in time; an involution that is bit-exact on the data.
  GridField time_reversed() const;
  /// x -> L - x substitution; applying it twice returns the original bit-exactly.
  GridField space_reflected() const;

  double sup_norm() const;
  /// max of sup |v| and the sup norms of forward difference quotients in both
  /// grid directions.
  double c1_norm() const;

  /// sup over nodes of max_i |a_i - b_i|; grids must match.
  static double sup_difference(const GridField& a, const GridField& b);
  /// As above restricted to the first `components` entries of each state.
  static double sup_difference(const GridField& a, const GridField& b, int components);

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

 private:
  int components_ = 0;
  int time_steps_ = 0;
  int cells_ = 0;
  double horizon_ = 0.0;
  double length_ = 0.0;
  std::vector<double> data_;
};

/// Full n-component boundary trace sampled uniformly on [0, T].
class Trace {
 public:
  Trace() = default;
  Trace(int components, double horizon, int time_steps);

  static Trace from_field(const GridField& field, int column);

  int components() const { return components_; }
  int time_steps() const { return time_steps_; }
  double horizon() const { return horizon_; }
  double dt() const { return horizon_ / time_steps_; }
  double time(int k) const { return horizon_ * k / time_steps_; }

  std::span<double> state(int k);
  std::span<const double> state(int k) const;

  /// Linear interpolation in time (clamped).
  void values(double t, std::span<double> out) const;
  double value(int component, double t) const;

  double c1_norm(int component) const;

 private:
  int components_ = 0;
  int time_steps_ = 0;
  double horizon_ = 0.0;
  std::vector<double> data_;  // layout [k][i]
};

}  // namespace hypctrl
