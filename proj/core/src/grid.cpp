#include "hypctrl/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hypctrl {

Profile::Profile(int components, double length, std::vector<double> data)
    : components_(components), length_(length), data_(std::move(data)) {
  if (components_ < 1 || length_ <= 0.0) throw std::invalid_argument("Profile: bad dimensions");
  if (data_.size() % components_ != 0 || data_.size() < 2u * components_)
    throw std::invalid_argument("Profile: sample count must be a positive multiple of n with >= 2 nodes");
  cells_ = static_cast<int>(data_.size() / components_) - 1;
}

Profile Profile::zero(int components, double length, int cells) {
  return Profile(components, length, std::vector<double>(static_cast<size_t>(cells + 1) * components, 0.0));
}

Profile Profile::sample(int components, double length, int cells, const SpaceFn& f) {
  std::vector<double> data(static_cast<size_t>(cells + 1) * components);
  for (int j = 0; j <= cells; ++j) f(length * j / cells, std::span<double>(&data[static_cast<size_t>(j) * components], components));
  return Profile(components, length, std::move(data));
}

Profile Profile::analytic(int components, double length, int cells, SpaceFn f) {
  Profile p = sample(components, length, cells, f);
  p.fn_ = std::move(f);
  return p;
}

std::span<double> Profile::state(int j) {
  return {&data_[static_cast<size_t>(j) * components_], static_cast<size_t>(components_)};
}

std::span<const double> Profile::state(int j) const {
  return {&data_[static_cast<size_t>(j) * components_], static_cast<size_t>(components_)};
}

double Profile::value(int component, double x) const {
  if (fn_) {
    std::vector<double> tmp(components_);
    fn_(std::clamp(x, 0.0, length_), tmp);
    return tmp[component];
  }
  double pos = std::clamp(x, 0.0, length_) / dx();
  int base = std::min(static_cast<int>(pos), cells_ - 1);
  double frac = pos - base;
  return state(base)[component] + frac * (state(base + 1)[component] - state(base)[component]);
}

void Profile::values(double x, std::span<double> out) const {
  if (fn_) {
    fn_(std::clamp(x, 0.0, length_), out);
    return;
  }
  for (int i = 0; i < components_; ++i) out[i] = value(i, x);
}

double Profile::one_sided_derivative(int component, int j) const {
  const double h = dx();
  if (j == 0) return (state(1)[component] - state(0)[component]) / h;
  if (j == cells_) return (state(cells_)[component] - state(cells_ - 1)[component]) / h;
  return (state(j + 1)[component] - state(j - 1)[component]) / (2.0 * h);
}

double Profile::sup_norm() const {
  double sup = 0.0;
  for (double v : data_) sup = std::max(sup, std::abs(v));
  return sup;
}

double Profile::c1_norm() const {
  double sup = sup_norm();
  double slope = 0.0;
  const double h = dx();
  for (int j = 0; j < cells_; ++j)
    for (int i = 0; i < components_; ++i)
      slope = std::max(slope, std::abs(state(j + 1)[i] - state(j)[i]) / h);
  return std::max(sup, slope);
}

GridField::GridField(int components, double horizon, double length, int time_steps, int cells)
    : components_(components), time_steps_(time_steps), cells_(cells), horizon_(horizon), length_(length),
      data_(static_cast<size_t>(time_steps + 1) * (cells + 1) * components, 0.0) {
  if (components < 1 || time_steps < 1 || cells < 1 || horizon <= 0.0 || length <= 0.0)
    throw std::invalid_argument("GridField: bad dimensions");
}

std::span<double> GridField::state(int k, int j) {
  return {&at(k, j, 0), static_cast<size_t>(components_)};
}

std::span<const double> GridField::state(int k, int j) const {
  return {&data_[(static_cast<size_t>(k) * (cells_ + 1) + j) * components_], static_cast<size_t>(components_)};
}

std::span<double> GridField::row(int k) {
  return {&at(k, 0, 0), static_cast<size_t>(cells_ + 1) * components_};
}

std::span<const double> GridField::row(int k) const {
  return {&data_[static_cast<size_t>(k) * (cells_ + 1) * components_], static_cast<size_t>(cells_ + 1) * components_};
}

Profile GridField::slice(int k) const {
  auto r = row(k);
  return Profile(components_, length_, std::vector<double>(r.begin(), r.end()));
}

void GridField::set_row(int k, const Profile& p) {
  for (int j = 0; j <= cells_; ++j) {
    auto dst = state(k, j);
    p.values(node(j), dst);
  }
}

GridField GridField::time_reversed() const {
  GridField out(components_, horizon_, length_, time_steps_, cells_);
  for (int k = 0; k <= time_steps_; ++k) {
    auto src = row(time_steps_ - k);
    std::copy(src.begin(), src.end(), out.row(k).begin());
  }
  return out;
}

GridField GridField::space_reflected() const {
  GridField out(components_, horizon_, length_, time_steps_, cells_);
  for (int k = 0; k <= time_steps_; ++k)
    for (int j = 0; j <= cells_; ++j) {
      auto src = state(k, cells_ - j);
      std::copy(src.begin(), src.end(), out.state(k, j).begin());
    }
  return out;
}

double GridField::sup_norm() const {
  double sup = 0.0;
  for (double v : data_) sup = std::max(sup, std::abs(v));
  return sup;
}

double GridField::c1_norm() const {
  double result = sup_norm();
  for (int k = 0; k <= time_steps_; ++k)
    for (int j = 0; j <= cells_; ++j)
      for (int i = 0; i < components_; ++i) {
        if (k < time_steps_)
          result = std::max(result, std::abs(at(k + 1, j, i) - at(k, j, i)) / dt());
        if (j < cells_)
          result = std::max(result, std::abs(at(k, j + 1, i) - at(k, j, i)) / dx());
      }
  return result;
}

double GridField::sup_difference(const GridField& a, const GridField& b) {
  return sup_difference(a, b, a.components_);
}

double GridField::sup_difference(const GridField& a, const GridField& b, int components) {
  if (a.time_steps_ != b.time_steps_ || a.cells_ != b.cells_)
    throw std::invalid_argument("GridField::sup_difference: grid mismatch");
  double sup = 0.0;
  for (int k = 0; k <= a.time_steps_; ++k)
    for (int j = 0; j <= a.cells_; ++j)
      for (int i = 0; i < components; ++i)
        sup = std::max(sup, std::abs(a.at(k, j, i) - b.at(k, j, i)));
  return sup;
}

Trace::Trace(int components, double horizon, int time_steps)
    : components_(components), time_steps_(time_steps), horizon_(horizon),
      data_(static_cast<size_t>(time_steps + 1) * components, 0.0) {
  if (components < 1 || time_steps < 1 || horizon <= 0.0) throw std::invalid_argument("Trace: bad dimensions");
}

Trace Trace::from_field(const GridField& field, int column) {
  Trace tr(field.components(), field.horizon(), field.time_steps());
  for (int k = 0; k <= field.time_steps(); ++k) {
    auto src = field.state(k, column);
    std::copy(src.begin(), src.end(), tr.state(k).begin());
  }
  return tr;
}

std::span<double> Trace::state(int k) {
  return {&data_[static_cast<size_t>(k) * components_], static_cast<size_t>(components_)};
}

std::span<const double> Trace::state(int k) const {
  return {&data_[static_cast<size_t>(k) * components_], static_cast<size_t>(components_)};
}

void Trace::values(double t, std::span<double> out) const {
  double pos = std::clamp(t, 0.0, horizon_) / dt();
  int base = std::min(static_cast<int>(pos), time_steps_ - 1);
  double frac = pos - base;
  auto lo = state(base);
  auto hi = state(base + 1);
  for (int i = 0; i < components_; ++i) out[i] = lo[i] + frac * (hi[i] - lo[i]);
}

double Trace::value(int component, double t) const {
  double pos = std::clamp(t, 0.0, horizon_) / dt();
  int base = std::min(static_cast<int>(pos), time_steps_ - 1);
  double frac = pos - base;
  return state(base)[component] + frac * (state(base + 1)[component] - state(base)[component]);
}

double Trace::c1_norm(int component) const {
  double sup = 0.0;
  double slope = 0.0;
  for (int k = 0; k <= time_steps_; ++k) {
    sup = std::max(sup, std::abs(state(k)[component]));
    if (k < time_steps_)
      slope = std::max(slope, std::abs(state(k + 1)[component] - state(k)[component]) / dt());
  }
  return std::max(sup, slope);
}

}  // namespace hypctrl
