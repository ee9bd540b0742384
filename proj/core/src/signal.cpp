#include "hypctrl/signal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hypctrl {

namespace {

double interp_uniform(std::span<const double> values, double horizon, double t) {
  const int n = static_cast<int>(values.size());
  if (n == 1) return values[0];
  const double step = horizon / (n - 1);
  double pos = std::clamp(t, 0.0, horizon) / step;
  int base = std::min(static_cast<int>(pos), n - 2);
  double frac = pos - base;
  return values[base] + frac * (values[base + 1] - values[base]);
}

}  // namespace

Signal::Signal(double horizon, std::vector<double> samples) : horizon_(horizon), values_(std::move(samples)) {
  if (horizon_ <= 0.0) throw std::invalid_argument("Signal: horizon must be positive");
  if (values_.size() < 2) throw std::invalid_argument("Signal: need at least 2 samples");
}

Signal Signal::zero(double horizon, int samples) {
  return Signal(horizon, std::vector<double>(std::max(samples, 2), 0.0));
}

Signal Signal::constant(double horizon, double value, int samples) {
  return Signal(horizon, std::vector<double>(std::max(samples, 2), value));
}

Signal Signal::from_function(double horizon, int samples, const std::function<double(double)>& f) {
  samples = std::max(samples, 2);
  std::vector<double> v(samples);
  for (int k = 0; k < samples; ++k) v[k] = f(horizon * k / (samples - 1));
  return Signal(horizon, std::move(v));
}

Signal Signal::analytic(double horizon, int samples, std::function<double(double)> f,
                        std::function<double(double)> df) {
  Signal s = from_function(horizon, samples, f);
  s.fn_ = std::move(f);
  s.dfn_ = std::move(df);
  return s;
}

Signal Signal::with_derivative_samples(double horizon, std::vector<double> values,
                                       std::vector<double> derivatives) {
  if (values.size() != derivatives.size())
    throw std::invalid_argument("Signal: derivative samples must match value samples");
  Signal s(horizon, std::move(values));
  s.derivative_values_ = std::move(derivatives);
  return s;
}

double Signal::operator()(double t) const {
  if (fn_) return fn_(std::clamp(t, 0.0, horizon_));
  return interp_uniform(values_, horizon_, t);
}

double Signal::derivative(double t) const {
  if (dfn_) return dfn_(std::clamp(t, 0.0, horizon_));
  if (!derivative_values_.empty()) return interp_uniform(derivative_values_, horizon_, t);
  const int n = sample_count();
  const double h = step();
  t = std::clamp(t, 0.0, horizon_);
  int k = std::min(static_cast<int>(t / h + 0.5), n - 1);
  if (k == 0) return (values_[1] - values_[0]) / h;
  if (k == n - 1) return (values_[n - 1] - values_[n - 2]) / h;
  return (values_[k + 1] - values_[k - 1]) / (2.0 * h);
}

double Signal::c1_norm() const { return hypctrl::c1_norm(values_, step()); }

bool Signal::is_zero() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

double c1_norm(std::span<const double> samples, double step) {
  double sup = 0.0;
  double slope = 0.0;
  for (size_t k = 0; k < samples.size(); ++k) {
    sup = std::max(sup, std::abs(samples[k]));
    if (k + 1 < samples.size()) slope = std::max(slope, std::abs(samples[k + 1] - samples[k]) / step);
  }
  return std::max(sup, slope);
}

}  // namespace hypctrl
