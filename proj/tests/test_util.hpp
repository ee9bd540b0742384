#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "hypctrl/signal.hpp"
#include "hypctrl/solver.hpp"
#include "hypctrl/system.hpp"

namespace hyptest {

inline constexpr double kPi = std::numbers::pi;

/// n=1 right-moving transport with loop coupling v(t,0) = v(t,L) + H(t).
inline hypctrl::DiagonalSystem advection_system(double speed = 1.0, double length = 2.0 * kPi,
                                                double radius = 2.0) {
  hypctrl::DiagonalSystem sys;
  sys.components = 1;
  sys.negative = 0;
  sys.zero = 0;
  sys.speeds = [speed](std::span<const double>, std::span<double> out) { out[0] = speed; };
  sys.sources = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };
  sys.radius = radius;
  sys.length = length;
  sys.source_free = true;
  return sys;
}

inline hypctrl::NonlocalBC advection_loop_bc(double horizon) {
  hypctrl::BcLayout lay{1, 0, 0};
  return hypctrl::NonlocalBC::from_parts(
      lay, [](double, std::span<const double> w, std::span<double> out) { out[0] = w[0]; },
      {hypctrl::Signal::zero(horizon)});
}

/// n=2 constant-speed system, speeds (-a, +b), no sources.
inline hypctrl::DiagonalSystem two_speed_system(double a = 1.0, double b = 1.0, double length = 2.0 * kPi,
                                                double radius = 2.0) {
  hypctrl::DiagonalSystem sys;
  sys.components = 2;
  sys.negative = 1;
  sys.zero = 0;
  sys.speeds = [a, b](std::span<const double>, std::span<double> out) {
    out[0] = -a;
    out[1] = b;
  };
  sys.sources = [](std::span<const double>, std::span<double> out) {
    out[0] = 0.0;
    out[1] = 0.0;
  };
  sys.radius = radius;
  sys.length = length;
  sys.source_free = true;
  return sys;
}

/// Loop coupling for the two-speed system: component 1 enters at x=0 as
/// v1(t,0) = v1(t,L) + H0(t), component 0 enters at x=L as
/// v0(t,L) = v0(t,0) + H1(t).
inline hypctrl::NonlocalBC two_speed_loop_bc(double horizon,
                                             std::vector<hypctrl::Signal> inhomogeneity = {}) {
  hypctrl::BcLayout lay{2, 1, 1};
  if (inhomogeneity.empty())
    inhomogeneity = {hypctrl::Signal::zero(horizon), hypctrl::Signal::zero(horizon)};
  return hypctrl::NonlocalBC::from_parts(
      lay,
      [](double, std::span<const double> w, std::span<double> out) {
        out[0] = w[1];  // s(t,0) from s(t,L)
        out[1] = w[0];  // r(t,L) from r(t,0)
      },
      std::move(inhomogeneity));
}

inline hypctrl::Profile sine_profile(int components, double length, int cells, double amplitude,
                                     std::vector<int> harmonics = {}) {
  if (harmonics.empty()) harmonics.assign(components, 1);
  return hypctrl::Profile::analytic(components, length, cells,
                                    [components, length, amplitude, harmonics](double x, std::span<double> out) {
                                      for (int i = 0; i < components; ++i)
                                        out[i] = amplitude * std::sin(2.0 * kPi * harmonics[i] * x / length);
                                    });
}

}  // namespace hyptest
