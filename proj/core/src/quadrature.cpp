#include "hypctrl/quadrature.hpp"

#include <cmath>

namespace hypctrl {

namespace {

double simpson(const std::function<double(double)>& f, double a, double fa, double b, double fb, double m,
               double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a, double fa, double b, double fb, double m,
                     double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(f, a, fa, m, fm, lm, flm);
  const double right = simpson(f, m, fm, b, fb, rm, frm);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tolerance) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b);
  const double m = 0.5 * (a + b), fm = f(m);
  return adaptive_step(f, a, fa, b, fb, m, fm, simpson(f, a, fa, b, fb, m, fm), tolerance, 48);
}

double trapezoid(std::span<const double> samples, double h) {
  if (samples.size() < 2) return 0.0;
  double sum = 0.5 * (samples.front() + samples.back());
  for (size_t k = 1; k + 1 < samples.size(); ++k) sum += samples[k];
  return sum * h;
}

double trapezoid(const std::function<double(double)>& f, double a, double b, int points) {
  const double h = (b - a) / (points - 1);
  double sum = 0.5 * (f(a) + f(b));
  for (int k = 1; k + 1 < points; ++k) sum += f(a + k * h);
  return sum * h;
}

}  // namespace hypctrl
