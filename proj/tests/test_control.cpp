#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hypctrl/control.hpp"
#include "hypctrl/errors.hpp"
#include "test_util.hpp"

using namespace hypctrl;
using hyptest::kPi;

namespace {

Profile control_phi(double length, int cells, double amplitude) {
  return Profile::analytic(2, length, cells, [length, amplitude](double x, std::span<double> out) {
    out[0] = amplitude * std::sin(2.0 * kPi * x / length);
    out[1] = amplitude * (std::cos(2.0 * kPi * x / length) - 1.0);
  });
}

}  // namespace

TEST_CASE("min_control_time: unit speeds on [0, 2pi] give 2pi") {
  auto sys = hyptest::two_speed_system();
  CHECK(min_control_time(sys) == doctest::Approx(2.0 * kPi));
  auto fast = hyptest::two_speed_system(2.0, 0.5);
  CHECK(min_control_time(fast) == doctest::Approx(2.0 * kPi / 0.5));
}

TEST_CASE("synthesize: zero data gives zero controls and witness") {
  auto sys = hyptest::two_speed_system();
  const double T = 1.2 * min_control_time(sys);
  auto bc = hyptest::two_speed_loop_bc(T);
  auto res = synthesize_controls(sys, bc, Profile::zero(2, sys.length, 64), Profile::zero(2, sys.length, 64), T, 64);
  CHECK(res.coverage_ok);
  for (double v : res.witness.data()) CHECK(v == 0.0);
  for (const auto& h : res.controls) CHECK(h.is_zero());
}

TEST_CASE("synthesize: loop round trip drives the state to psi") {
  auto sys = hyptest::two_speed_system();
  const double T = 1.2 * min_control_time(sys);
  auto bc = hyptest::two_speed_loop_bc(T);

  auto pipeline = [&](int cells) {
    Profile phi = control_phi(sys.length, cells, 1e-3);
    Profile psi = Profile::zero(2, sys.length, cells);
    auto res = synthesize_controls(sys, bc, phi, psi, T, cells);
    auto ver = verify_control(sys, bc, phi, res.controls, psi, T, cells);
    return std::tuple{std::move(res), std::move(ver)};
  };

  const int cells = 200;
  auto [res, ver] = pipeline(cells);
  CHECK(res.coverage_ok);
  CHECK(res.boundary_residual <= 1e-10);

  // per-resolution error scale: pipeline self-difference against the 4x run
  auto [res4, ver4] = pipeline(4 * cells);
  double est = richardson_error(ver.field.slice(ver.field.time_steps()),
                                ver4.field.slice(ver4.field.time_steps()));
  CHECK(res.initial_mismatch <= 10.0 * est);
  CHECK(res.final_mismatch <= 10.0 * est);
  CHECK(ver.final_sup_error <= 10.0 * est);

  // refinement: the verified error drops by roughly the scheme order
  auto [res2, ver2] = pipeline(2 * cells);
  double factor = ver.final_sup_error / ver2.final_sup_error;
  CHECK(factor >= 1.5);
  CHECK(factor <= 3.0);
}

TEST_CASE("synthesize: horizon at half the threshold is rejected") {
  auto sys = hyptest::two_speed_system();
  const double T = 0.5 * min_control_time(sys);
  auto bc = hyptest::two_speed_loop_bc(T);
  Profile phi = control_phi(sys.length, 64, 1e-3);
  try {
    synthesize_controls(sys, bc, phi, Profile::zero(2, sys.length, 64), T, 64);
    FAIL("expected TimeTooShort or CoverageFailure");
  } catch (const SolverError& e) {
    bool expected = e.code() == ErrorCode::TimeTooShort || e.code() == ErrorCode::CoverageFailure;
    CHECK(expected);
  }
}

TEST_CASE("verify: zero controls leave an incompatible target unreached") {
  auto sys = hyptest::two_speed_system();
  const double T = 1.2 * min_control_time(sys);
  const int coarse = 80, fine = 160;
  auto bc = hyptest::two_speed_loop_bc(T);
  std::vector<Signal> none{Signal::zero(T), Signal::zero(T)};
  double errs[2];
  int idx = 0;
  for (int cells : {coarse, fine}) {
    Profile phi = control_phi(sys.length, cells, 1e-3);
    // exact zero-control solution is the periodic translate of phi, not zero
    auto ver = verify_control(sys, bc, phi, none, Profile::zero(2, sys.length, cells), T, cells);
    errs[idx++] = ver.final_sup_error;
  }
  CHECK(errs[0] > 5e-4);  // stays bounded away from zero under refinement
  CHECK(errs[1] > 5e-4);
}

TEST_CASE("blend: assembled trace is C1 through the junctions") {
  auto sys = hyptest::two_speed_system();
  const double T = 1.2 * min_control_time(sys);
  const int cells = 80;
  auto bc = hyptest::two_speed_loop_bc(T);
  Profile phi = control_phi(sys.length, cells, 1e-3);
  Profile psi = Profile::zero(2, sys.length, cells);
  auto fwd = solve_forward(sys, bc, phi, T, cells);
  auto bwd = solve_backward(sys, bc, psi, T, cells);
  std::vector<double> lo{0.35 * T, 0.4 * T}, hi{0.7 * T, 0.65 * T};
  JoinedTrace joined(Trace::from_field(fwd.field, 0), Trace::from_field(bwd.field, 0), lo, hi);

  const double scale = std::max(1e-3, phi.c1_norm());
  // one-sided slope with the O(eps^2) term cancelled; the blend has zero
  // curvature at its ends so this is exact up to rounding
  auto right_slope = [&](int i, double tj) {
    const double e1 = 1e-4, e2 = 2e-4;
    double s1 = (joined.value(i, tj + e1) - joined.value(i, tj)) / e1;
    double s2 = (joined.value(i, tj + e2) - joined.value(i, tj)) / e2;
    return (4.0 * s1 - s2) / 3.0;
  };
  auto left_slope = [&](int i, double tj) {
    const double e1 = 1e-4, e2 = 2e-4;
    double s1 = (joined.value(i, tj) - joined.value(i, tj - e1)) / e1;
    double s2 = (joined.value(i, tj) - joined.value(i, tj - e2)) / e2;
    return (4.0 * s1 - s2) / 3.0;
  };
  for (int i = 0; i < 2; ++i) {
    for (double tj : {joined.junction_lo(i), joined.junction_hi(i)}) {
      double value_jump = std::abs(joined.value(i, tj + 1e-12) - joined.value(i, tj - 1e-12));
      CHECK(value_jump / scale <= 1e-10);
      double slope_jump = std::abs(right_slope(i, tj) - left_slope(i, tj));
      CHECK(slope_jump / scale <= 1e-10);
    }
  }
}

TEST_CASE("observations: round-trip reconstruction recovers phi") {
  auto sys = hyptest::two_speed_system();
  const double T = 1.2 * min_control_time(sys);
  const int cells = 100;
  auto bc = hyptest::two_speed_loop_bc(T);
  Profile phi = control_phi(sys.length, cells, 1e-3);

  auto roundtrip = [&](int nx) {
    Profile p = control_phi(sys.length, nx, 1e-3);
    auto fwd = solve_forward(sys, bc, p, T, nx);
    auto obs = ObservationSet::from_field(sys, fwd.field, bc);
    return reconstruct_initial(sys, bc, obs, T, nx);
  };
  auto rec = roundtrip(cells);
  auto rec4 = roundtrip(4 * cells);
  double est = richardson_error(rec.initial, rec4.initial);
  double err = 0.0;
  for (int j = 0; j <= cells; ++j)
    for (int i = 0; i < 2; ++i)
      err = std::max(err, std::abs(rec.initial.state(j)[i] - phi.value(i, rec.initial.node(j))));
  CHECK(err <= 10.0 * est);
  CHECK(rec.overlap_nodes > 0);

  // refinement: reconstruction error drops by roughly the scheme order
  auto rec2 = roundtrip(2 * cells);
  double err2 = 0.0;
  Profile phi2 = control_phi(sys.length, 2 * cells, 1e-3);
  for (int j = 0; j <= 2 * cells; ++j)
    for (int i = 0; i < 2; ++i)
      err2 = std::max(err2, std::abs(rec2.initial.state(j)[i] - phi2.value(i, rec2.initial.node(j))));
  double factor = err / err2;
  CHECK(factor >= 1.5);
  CHECK(factor <= 3.0);
}

TEST_CASE("observations: zero observations give zero reconstruction") {
  auto sys = hyptest::two_speed_system();
  const double T = 1.2 * min_control_time(sys);
  auto bc = hyptest::two_speed_loop_bc(T);
  auto fwd = solve_forward(sys, bc, Profile::zero(2, sys.length, 64), T, 64);
  auto obs = ObservationSet::from_field(sys, fwd.field, bc);
  auto rec = reconstruct_initial(sys, bc, obs, T, 64);
  CHECK(rec.initial.sup_norm() == 0.0);
}

TEST_CASE("observations: horizon below the threshold fails coverage") {
  auto sys = hyptest::two_speed_system();
  const double T = 0.5 * min_control_time(sys);
  auto bc = hyptest::two_speed_loop_bc(T);
  Profile phi = control_phi(sys.length, 64, 1e-3);
  auto fwd = solve_forward(sys, bc, phi, T, 64);
  auto obs = ObservationSet::from_field(sys, fwd.field, bc);
  CHECK_THROWS_AS(reconstruct_initial(sys, bc, obs, T, 64), SolverError);
}

TEST_CASE("observability ratio: conventions and linear invariance") {
  auto sys = hyptest::two_speed_system();
  const double T = 1.2 * min_control_time(sys);
  const int cells = 80;
  auto bc = hyptest::two_speed_loop_bc(T);

  // 0/0 convention
  auto fwd0 = solve_forward(sys, bc, Profile::zero(2, sys.length, cells), T, cells);
  auto obs0 = ObservationSet::from_field(sys, fwd0.field, bc);
  auto r0 = observability_ratio(Profile::zero(2, sys.length, cells), obs0);
  CHECK(r0.ratio == 0.0);
  CHECK_FALSE(r0.estimate_violated);

  // linear system: doubling the data leaves the ratio fixed
  Profile phi1 = control_phi(sys.length, cells, 1e-3);
  Profile phi2 = control_phi(sys.length, cells, 2e-3);
  auto f1 = solve_forward(sys, bc, phi1, T, cells);
  auto f2 = solve_forward(sys, bc, phi2, T, cells);
  auto v1 = observability_ratio(phi1, ObservationSet::from_field(sys, f1.field, bc));
  auto v2 = observability_ratio(phi2, ObservationSet::from_field(sys, f2.field, bc));
  CHECK(v1.ratio == doctest::Approx(v2.ratio).epsilon(1e-6));

  // nonzero state with vanished observations is flagged
  ObservationSet empty;
  empty.horizon = T;
  empty.at_0 = {Signal::zero(T)};
  empty.at_L = {Signal::zero(T)};
  auto bad = observability_ratio(phi1, empty);
  CHECK(bad.estimate_violated);
}

TEST_CASE("observability: measured constant is stable over random runs") {
  auto sys = hyptest::two_speed_system();
  const double T = 1.2 * min_control_time(sys);
  const int cells = 64;
  auto bc = hyptest::two_speed_loop_bc(T);
  std::mt19937 rng(20240817);
  std::uniform_real_distribution<double> amp(0.2e-3, 1.2e-3);
  std::uniform_int_distribution<int> harmonic(1, 3);

  double lo = 1e300, hi = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    double a0 = amp(rng), a1 = amp(rng);
    int k0 = harmonic(rng), k1 = harmonic(rng);
    double p0 = amp(rng) * 1e3, p1 = amp(rng) * 1e3;
    Profile phi = Profile::analytic(2, sys.length, cells, [&, a0, a1, k0, k1, p0, p1](double x, std::span<double> out) {
      out[0] = a0 * std::sin(2.0 * kPi * k0 * x / sys.length + p0);
      out[1] = a1 * std::sin(2.0 * kPi * k1 * x / sys.length + p1);
    });
    auto fwd = solve_forward(sys, bc, phi, T, cells);
    auto r = observability_ratio(phi, ObservationSet::from_field(sys, fwd.field, bc));
    REQUIRE_FALSE(r.estimate_violated);
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
  }
  CHECK(hi / lo <= 10.0);
  MESSAGE("observability ratio range: [", lo, ", ", hi, "]");
}

TEST_CASE("boundedness: forward solution C1 norm scales with the data") {
  auto sys = hyptest::two_speed_system();
  const double T = 4.0;
  const int cells = 64;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> amp(0.2e-3, 1e-3);
  std::uniform_int_distribution<int> harmonic(1, 2);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    double a = amp(rng);
    int k = harmonic(rng);
    double hb = amp(rng);
    // inhomogeneity with H(0)=0 keeps the corner data compatible
    std::vector<Signal> H{Signal::from_function(T, 257, [hb, T](double t) { return hb * std::sin(2.0 * kPi * t / T); }),
                          Signal::from_function(T, 257, [hb, T](double t) { return -hb * std::sin(4.0 * kPi * t / T); })};
    auto bc = hyptest::two_speed_loop_bc(T, H);
    Profile phi = hyptest::sine_profile(2, sys.length, cells, a, {k, k});
    auto res = solve_forward(sys, bc, phi, T, cells);
    double data_norm = phi.c1_norm() + H[0].c1_norm() + H[1].c1_norm();
    worst = std::max(worst, res.field.c1_norm() / data_norm);
  }
  CHECK(worst <= 50.0);
  MESSAGE("measured forward C1 amplification: ", worst);
}
