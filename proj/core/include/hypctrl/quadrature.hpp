#pragma once

#include <functional>
#include <span>

namespace hypctrl {

/// Adaptive Simpson quadrature of f over [a, b] to the given absolute
/// tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tolerance = 1e-12);

/// Composite trapezoid over uniformly spaced samples with spacing h.
double trapezoid(std::span<const double> samples, double h);

/// Trapezoid of f sampled at `points` uniform nodes over [a, b].
double trapezoid(const std::function<double(double)>& f, double a, double b, int points);

}  // namespace hypctrl
