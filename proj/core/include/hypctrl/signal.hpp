#pragma once

#include <functional>
#include <span>
#include <vector>

namespace hypctrl {

/// Time-sampled scalar function on a uniform grid over [0, T].
///
/// A signal may optionally carry analytic value/derivative evaluators; when
/// present they are used instead of linear interpolation so that analytically
/// specified controls keep full accuracy on any solver grid.  The samples are
/// always kept: discrete C1 norms and serialization work off them.
class Signal {
 public:
  Signal() = default;

  /// Samples must cover [0, T] uniformly (at least 2 of them).
  Signal(double horizon, std::vector<double> samples);

  static Signal zero(double horizon, int samples = 2);
  static Signal constant(double horizon, double value, int samples = 2);
  static Signal from_function(double horizon, int samples, const std::function<double(double)>& f);
  /// Keeps `f` (and optionally `df`) for exact evaluation between samples.
  static Signal analytic(double horizon, int samples, std::function<double(double)> f,
                         std::function<double(double)> df = nullptr);
  /// Value samples plus matching derivative samples on the same grid.
  static Signal with_derivative_samples(double horizon, std::vector<double> values,
                                        std::vector<double> derivatives);

  double horizon() const { return horizon_; }
  int sample_count() const { return static_cast<int>(values_.size()); }
  double step() const { return horizon_ / (sample_count() - 1); }
  std::span<const double> samples() const { return values_; }

  /// Value at time t (clamped to [0, T]).
  double operator()(double t) const;

  /// First derivative at t: analytic if available, otherwise differences of
  /// the samples (centered inside, one-sided at the ends).
  double derivative(double t) const;

  /// max(sup |value|, sup |forward difference| / step) over the sample grid.
  double c1_norm() const;

  bool is_zero() const;

 private:
  double horizon_ = 1.0;
  std::vector<double> values_{0.0, 0.0};
  std::vector<double> derivative_values_;  // optional, same grid as values_
  std::function<double(double)> fn_;
  std::function<double(double)> dfn_;
};

/// Discrete C1 norm of uniformly spaced samples: max of sup |values| and
/// sup of first differences divided by the step.
double c1_norm(std::span<const double> samples, double step);

}  // namespace hypctrl
