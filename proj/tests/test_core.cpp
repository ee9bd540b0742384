#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hypctrl/errors.hpp"
#include "hypctrl/newton.hpp"
#include "hypctrl/reflect.hpp"
#include "hypctrl/signal.hpp"
#include "hypctrl/solver.hpp"
#include "hypctrl/system.hpp"
#include "test_util.hpp"

using namespace hypctrl;
using hyptest::kPi;

TEST_CASE("signal: constant has C1 norm |c|") {
  Signal s = Signal::constant(1.0, -3.5, 16);
  CHECK(s.c1_norm() == doctest::Approx(3.5));
  CHECK(s(0.3) == doctest::Approx(-3.5));
}

TEST_CASE("signal: sin on [0,2pi] with 1000 samples has C1 norm 1") {
  Signal s = Signal::from_function(2.0 * kPi, 1000, [](double t) { return std::sin(t); });
  CHECK(s.c1_norm() == doctest::Approx(1.0).epsilon(2e-3));
}

TEST_CASE("signal: derivative falls back to sample differences") {
  Signal s = Signal::from_function(1.0, 2001, [](double t) { return t * t; });
  CHECK(s.derivative(0.5) == doctest::Approx(1.0).epsilon(1e-5));
  Signal a = Signal::analytic(1.0, 11, [](double t) { return t * t; }, [](double t) { return 2.0 * t; });
  CHECK(a.derivative(0.25) == doctest::Approx(0.5));
}

TEST_CASE("grid: zero field has zero norms") {
  GridField f(2, 1.0, 1.0, 4, 4);
  CHECK(f.sup_norm() == 0.0);
  CHECK(f.c1_norm() == 0.0);
}

TEST_CASE("grid: time reversal and space reflection are involutions, bit-exact") {
  GridField f(2, 1.0, 3.0, 5, 7);
  for (int k = 0; k <= 5; ++k)
    for (int j = 0; j <= 7; ++j)
      for (int i = 0; i < 2; ++i) f.at(k, j, i) = std::sin(1.0 + k) * std::cos(2.0 + j) + i;
  GridField tr = f.time_reversed().time_reversed();
  GridField sr = f.space_reflected().space_reflected();
  auto a = f.data();
  auto b = tr.data();
  auto c = sr.data();
  for (size_t idx = 0; idx < a.size(); ++idx) {
    CHECK(a[idx] == b[idx]);
    CHECK(a[idx] == c[idx]);
  }
}

TEST_CASE("profile: one-sided derivatives and interpolation") {
  Profile p = Profile::sample(1, 1.0, 10, [](double x, std::span<double> out) { out[0] = 2.0 * x; });
  CHECK(p.one_sided_derivative(0, 0) == doctest::Approx(2.0));
  CHECK(p.one_sided_derivative(0, 10) == doctest::Approx(2.0));
  CHECK(p.value(0, 0.05) == doctest::Approx(0.1));
  CHECK(p.c1_norm() == doctest::Approx(2.0));
}

TEST_CASE("newton: solves a small nonlinear system with damping") {
  // roots of (x^2 + y - 3, y^2 - x - 1): (x,y) near (1.28, 1.35)
  auto residual = [](std::span<const double> z, std::span<double> out) {
    out[0] = z[0] * z[0] + z[1] - 3.0;
    out[1] = z[1] * z[1] - z[0] - 1.0;
  };
  std::vector<double> z{0.5, 0.5};
  auto res = newton_solve(z, residual);
  CHECK(res.converged);
  CHECK(std::abs(z[0] * z[0] + z[1] - 3.0) <= 1e-12);
  CHECK(std::abs(z[1] * z[1] - z[0] - 1.0) <= 1e-12);
}

TEST_CASE("newton: divergence is reported") {
  auto residual = [](std::span<const double> z, std::span<double> out) { out[0] = z[0] * z[0] + 1.0; };
  std::vector<double> z{0.0};
  CHECK_THROWS_AS(newton_solve(z, residual), SolverError);
}

TEST_CASE("validate: constant two-speed system is valid") {
  auto sys = hyptest::two_speed_system();
  auto report = validate_system(sys, 64);
  CHECK(report.valid());
  CHECK(report.samples_checked == 64);
}

TEST_CASE("validate: source(v)=v has source(0)=0 and passes") {
  auto sys = hyptest::two_speed_system();
  sys.sources = [](std::span<const double> v, std::span<double> out) {
    out[0] = v[0];
    out[1] = v[1];
  };
  sys.source_free = false;
  CHECK(validate_system(sys, 32).valid());
}

TEST_CASE("validate: speed sign change inside the ball is reported") {
  DiagonalSystem sys;
  sys.components = 2;
  sys.negative = 1;
  sys.zero = 0;
  sys.radius = 1.0;
  sys.length = 1.0;
  sys.speeds = [](std::span<const double> v, std::span<double> out) {
    out[0] = v[0];  // declared negative but changes sign at v0 = 0
    out[1] = 1.0;
  };
  sys.sources = [](std::span<const double>, std::span<double> out) { out[0] = out[1] = 0.0; };
  auto report = validate_system(sys, 64);
  CHECK_FALSE(report.valid());
  bool sign_issue = false;
  for (const auto& issue : report.issues)
    if (issue.kind == ValidationIssue::Kind::SignPattern && issue.component == 0) sign_issue = true;
  CHECK(sign_issue);
}

TEST_CASE("validate: non-finite evaluation throws") {
  auto sys = hyptest::two_speed_system();
  sys.speeds = [](std::span<const double> v, std::span<double> out) {
    out[0] = v[0] > 0.0 ? std::nan("") : -1.0;
    out[1] = 1.0;
  };
  CHECK_THROWS_AS(validate_system(sys, 8), SolverError);
}

TEST_CASE("compatibility: zero data and zero inhomogeneity give zero residuals") {
  auto sys = hyptest::two_speed_system();
  auto bc = hyptest::two_speed_loop_bc(1.0);
  Profile phi = Profile::zero(2, sys.length, 16);
  auto report = check_compatibility(sys, bc, phi, 1);
  CHECK(report.max_c0() == 0.0);
  CHECK(report.max_c1() == 0.0);
}

TEST_CASE("compatibility: H chosen to cancel the C0 residual") {
  auto sys = hyptest::two_speed_system();
  const double T = 1.0;
  // random-ish non-periodic profile: C0 residual would be nonzero with H=0
  Profile phi = Profile::analytic(2, sys.length, 64, [](double x, std::span<double> out) {
    out[0] = 0.01 * std::sin(x) + 0.003 * x;
    out[1] = 0.01 * std::cos(1.3 * x);
  });
  // cancel: H0(0) = v1(0,0) - v1(0,L), H1(0) = v0(0,L) - v0(0,0)
  double v1_0 = phi.value(1, 0.0), v1_L = phi.value(1, sys.length);
  double v0_0 = phi.value(0, 0.0), v0_L = phi.value(0, sys.length);
  auto bc = hyptest::two_speed_loop_bc(
      T, {Signal::constant(T, v1_0 - v1_L), Signal::constant(T, v0_L - v0_0)});
  auto report = check_compatibility(sys, bc, phi, 1);
  CHECK(report.max_c0() <= 1e-12);
  CHECK(report.max_c1() > 1e-6);  // generically nonzero
}

TEST_CASE("compatibility: too few nodes throws GridTooCoarse") {
  auto sys = hyptest::two_speed_system();
  auto bc = hyptest::two_speed_loop_bc(1.0);
  Profile phi = Profile::zero(2, sys.length, 1);
  CHECK_THROWS_AS(check_compatibility(sys, bc, phi, 0), SolverError);
}

TEST_CASE("reflect_enlarge: speed pattern doubles to {-1,-1,+1,+1}") {
  auto sys = hyptest::two_speed_system();
  auto bc = hyptest::two_speed_loop_bc(1.0);
  auto en = reflect_enlarge(sys, bc);
  CHECK(en.system.components == 4);
  CHECK(en.system.negative == 2);
  CHECK(en.system.zero == 0);
  std::vector<double> v(4, 0.0), lam(4);
  en.system.speeds(v, lam);
  CHECK(lam[0] == doctest::Approx(-1.0));
  CHECK(lam[1] == doctest::Approx(-1.0));
  CHECK(lam[2] == doctest::Approx(1.0));
  CHECK(lam[3] == doctest::Approx(1.0));
  CHECK(validate_system(en.system, 32).valid());
}

TEST_CASE("reflect_enlarge: enlarged profile mirrors the original") {
  auto sys = hyptest::two_speed_system();
  auto bc = hyptest::two_speed_loop_bc(1.0);
  auto en = reflect_enlarge(sys, bc);
  Profile phi = hyptest::sine_profile(2, sys.length, 32, 0.01, {1, 2});
  Profile big = en.enlarge_profile(phi);
  for (int j = 0; j <= 32; ++j) {
    auto v = phi.state(j);
    auto vr = phi.state(32 - j);
    auto V = big.state(j);
    for (int i = 0; i < 2; ++i) {
      CHECK(V[en.old_to_new[i]] == doctest::Approx(v[i]));
      CHECK(V[en.old_to_new[2 + i]] == doctest::Approx(vr[i]));
    }
  }
}

TEST_CASE("c1_norm free functions cover signal, profile and field") {
  CHECK(c1_norm(Signal::constant(2.0, 4.0)) == doctest::Approx(4.0));
  Profile p = Profile::zero(1, 1.0, 8);
  CHECK(c1_norm(p) == 0.0);
  GridField f(1, 1.0, 1.0, 2, 2);
  CHECK(c1_norm(f) == 0.0);
}
