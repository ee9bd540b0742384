#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hypctrl/errors.hpp"
#include "hypctrl/reflect.hpp"
#include "hypctrl/solver.hpp"
#include "test_util.hpp"

using namespace hypctrl;
using hyptest::kPi;

TEST_CASE("cfl_dt matches the stated rule") {
  auto sys = hyptest::two_speed_system(2.0, 2.0);
  std::vector<double> slice(2, 0.0);
  CHECK(cfl_dt(sys, slice, 0.01) == doctest::Approx(0.0045));
  CHECK(cfl_dt(sys, slice, 0.01, 0.001) == doctest::Approx(0.001));  // truncated to remaining time

  auto sys1 = hyptest::two_speed_system(1.0, 1.0);
  CHECK(cfl_dt(sys1, slice, 2.0 * kPi / 400) == doctest::Approx(0.9 * 2.0 * kPi / 400).epsilon(1e-12));

  // all-zero speeds fall back to the guard and the remaining-time cap
  DiagonalSystem flat;
  flat.components = 1;
  flat.negative = 0;
  flat.zero = 1;
  flat.radius = 1.0;
  flat.length = 1.0;
  flat.speeds = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };
  flat.sources = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };
  std::vector<double> s1(1, 0.0);
  CHECK(cfl_dt(flat, s1, 0.1, 5.0) == doctest::Approx(5.0));
}

TEST_CASE("forward: zero data stays exactly zero") {
  auto sys = hyptest::two_speed_system();
  auto bc = hyptest::two_speed_loop_bc(1.0);
  auto res = solve_forward(sys, bc, Profile::zero(2, sys.length, 32), 1.0, 32);
  for (double v : res.field.data()) CHECK(v == 0.0);
}

TEST_CASE("forward: advection loop reproduces the exact translate at first order") {
  auto sys = hyptest::advection_system();
  const double T = 2.5;
  double prev_err = 0.0;
  for (int cells : {100, 200}) {
    auto bc = hyptest::advection_loop_bc(T);
    Profile phi = Profile::analytic(1, sys.length, cells, [&](double x, std::span<double> out) {
      out[0] = 0.5 * std::sin(2.0 * kPi * x / sys.length);
    });
    auto res = solve_forward(sys, bc, phi, T, cells);
    double err = 0.0;
    const auto& f = res.field;
    for (int j = 0; j <= cells; ++j) {
      double x = f.node(j);
      double exact = 0.5 * std::sin(2.0 * kPi * (x - T) / sys.length);
      err = std::max(err, std::abs(f.at(f.time_steps(), j, 0) - exact));
    }
    CHECK(err <= 30.0 * sys.length / cells);
    if (prev_err > 0.0) {
      double order = std::log2(prev_err / err);
      CHECK(order > 0.6);
    }
    prev_err = err;
  }
}

TEST_CASE("forward: stationary component follows the source ODE") {
  // speeds (-1, 0, 1); middle component decays by dv/dt = -v
  DiagonalSystem sys;
  sys.components = 3;
  sys.negative = 1;
  sys.zero = 1;
  sys.radius = 2.0;
  sys.length = 2.0 * kPi;
  sys.speeds = [](std::span<const double>, std::span<double> out) {
    out[0] = -1.0;
    out[1] = 0.0;
    out[2] = 1.0;
  };
  sys.sources = [](std::span<const double> v, std::span<double> out) {
    out[0] = 0.0;
    out[1] = -v[1];
    out[2] = 0.0;
  };
  // periodic-style coupling for the two moving components
  BcLayout lay{3, 1, 2};
  auto bc = NonlocalBC::from_parts(
      lay,
      [](double, std::span<const double> w, std::span<double> out) {
        // w = (v0(0), v1(0), v1(L), v2(L)); incoming: v2(0), v0(L)
        out[0] = w[3];
        out[1] = w[0];
      },
      {Signal::zero(4.0), Signal::zero(4.0)});
  const int cells = 200;
  Profile phi = Profile::analytic(3, sys.length, cells, [&](double x, std::span<double> out) {
    out[0] = 0.0;
    out[1] = 0.1 * std::sin(x);
    out[2] = 0.0;
  });
  const double T = 1.0;
  auto res = solve_forward(sys, bc, phi, T, cells);
  const auto& f = res.field;
  double err = 0.0;
  for (int j = 0; j <= cells; ++j) {
    double exact = 0.1 * std::sin(f.node(j)) * std::exp(-T);
    err = std::max(err, std::abs(f.at(f.time_steps(), j, 1) - exact));
  }
  CHECK(err <= 1.5 * f.dt());
}

TEST_CASE("forward: incompatible data is rejected") {
  auto sys = hyptest::two_speed_system();
  auto bc = hyptest::two_speed_loop_bc(1.0);
  Profile phi = Profile::analytic(2, sys.length, 32, [](double x, std::span<double> out) {
    out[0] = 0.01 * x;  // v0(0,L) != v0(0,0)
    out[1] = 0.0;
  });
  CHECK_THROWS_AS(solve_forward(sys, bc, phi, 1.0, 32), SolverError);
}

TEST_CASE("forward: admissible ball violations abort") {
  auto sys = hyptest::two_speed_system();
  sys.radius = 0.005;
  auto bc = hyptest::two_speed_loop_bc(1.0);
  Profile phi = hyptest::sine_profile(2, sys.length, 32, 0.01);
  CHECK_THROWS_AS(solve_forward(sys, bc, phi, 1.0, 32), SolverError);
}

TEST_CASE("cauchy: constant data on constant speeds gives the exact triangle") {
  auto sys = hyptest::two_speed_system(1.0, 1.0, 1.0);
  const double c = 0.25;
  Profile phi = Profile::analytic(2, sys.length, 100, [&](double, std::span<double> out) {
    out[0] = c;
    out[1] = c;
  });
  auto dom = solve_cauchy_max_domain(sys, phi, 100);
  const int last = dom.rows() - 1;
  CHECK(dom.close_time() == doctest::Approx(0.5).epsilon(0.02));
  for (int k = 0; k <= last; ++k) {
    CHECK(dom.x1[k] == doctest::Approx(dom.time(k)));
    CHECK(dom.x2[k] == doctest::Approx(1.0 - dom.time(k)));
    for (int j = dom.node_lo[k]; j <= dom.node_hi[k]; ++j) {
      CHECK(dom.state(k, j)[0] == doctest::Approx(c));
      CHECK(dom.state(k, j)[1] == doctest::Approx(c));
    }
  }
}

TEST_CASE("cauchy: zero data gives the zero triangle") {
  auto sys = hyptest::two_speed_system(1.0, 1.0, 1.0);
  auto dom = solve_cauchy_max_domain(sys, Profile::zero(2, 1.0, 64), 64);
  CHECK(dom.sup_norm() == 0.0);
}

TEST_CASE("cauchy: C1 estimate ratio stays bounded over random small data") {
  auto sys = hyptest::two_speed_system(1.0, 1.5, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    double a = 1e-3 * (1.0 + 0.05 * trial);
    int k1 = 1 + trial % 3, k2 = 1 + trial % 2;
    Profile phi = Profile::analytic(2, sys.length, 80, [&](double x, std::span<double> out) {
      out[0] = a * std::sin(2.0 * kPi * k1 * x);
      out[1] = a * std::cos(2.0 * kPi * k2 * x);
    });
    auto dom = solve_cauchy_max_domain(sys, phi, 80);
    worst = std::max(worst, dom.c1_norm() / phi.c1_norm());
  }
  CHECK(worst > 0.0);
  CHECK(worst <= 5.0);  // transport without sources should not amplify much
  MESSAGE("measured Cauchy C1 ratio: ", worst);
}

TEST_CASE("backward: zero data stays zero") {
  auto sys = hyptest::two_speed_system();
  auto bc = hyptest::two_speed_loop_bc(1.0);
  auto res = solve_backward(sys, bc, Profile::zero(2, sys.length, 32), 1.0, 32);
  for (double v : res.field.data()) CHECK(v == 0.0);
}

TEST_CASE("backward: exact translate solution at t=0") {
  auto sys = hyptest::two_speed_system();
  const double T = 1.0;
  const int cells = 200;
  auto bc = hyptest::two_speed_loop_bc(T);
  const double a = 0.01;
  Profile psi = Profile::analytic(2, sys.length, cells, [&](double x, std::span<double> out) {
    out[0] = a * std::sin(2.0 * kPi * x / sys.length);
    out[1] = a * std::cos(2.0 * kPi * x / sys.length);
  });
  auto res = solve_backward(sys, bc, psi, T, cells);
  const auto& f = res.field;
  // final row equals psi
  double err_T = 0.0;
  for (int j = 0; j <= cells; ++j)
    for (int i = 0; i < 2; ++i)
      err_T = std::max(err_T, std::abs(f.at(f.time_steps(), j, i) - psi.state(j)[i]));
  CHECK(err_T <= 1e-13);
  // exact backward transport: v0 rides x+t=const, v1 rides x-t=const, so
  // v0(0,x) = psi0(x - T) and v1(0,x) = psi1(x + T) (loop-periodic)
  double err_0 = 0.0;
  for (int j = 0; j <= cells; ++j) {
    double x = f.node(j);
    double e0 = a * std::sin(2.0 * kPi * (x - T) / sys.length);
    double e1 = a * std::cos(2.0 * kPi * (x + T) / sys.length);
    err_0 = std::max(err_0, std::abs(f.at(0, j, 0) - e0));
    err_0 = std::max(err_0, std::abs(f.at(0, j, 1) - e1));
  }
  CHECK(err_0 <= 30.0 * a * sys.length / cells);
}

TEST_CASE("backward: round trip with forward solve at first order") {
  auto sys = hyptest::two_speed_system();
  const double T = 1.5;
  const int cells = 160;
  auto bc = hyptest::two_speed_loop_bc(T);
  Profile phi = hyptest::sine_profile(2, sys.length, cells, 0.01, {1, 2});
  auto fwd = solve_forward(sys, bc, phi, T, cells);
  auto bwd = solve_backward(sys, bc, fwd.field.slice(fwd.field.time_steps()), T, cells);
  double err = 0.0;
  for (int j = 0; j <= cells; ++j)
    for (int i = 0; i < 2; ++i) err = std::max(err, std::abs(bwd.field.at(0, j, i) - phi.state(j)[i]));
  CHECK(err <= 60.0 * 0.01 * sys.length / cells);
}

TEST_CASE("sidewise: zero data gives zero field") {
  auto sys = hyptest::two_speed_system();
  Trace tr(2, 1.0, 64);
  auto res = solve_sidewise(sys, tr, Profile::zero(2, sys.length, 64), Profile::zero(2, sys.length, 64), 64);
  CHECK(res.full);
  for (double v : res.field.data()) CHECK(v == 0.0);
}

TEST_CASE("sidewise: reproduces a forward solution from its trace and rows") {
  auto sys = hyptest::two_speed_system();
  const double T = 1.2 * sys.length;
  const int cells = 120;
  auto bc = hyptest::two_speed_loop_bc(T);
  Profile phi = hyptest::sine_profile(2, sys.length, cells, 0.01, {1, 2});
  auto fwd = solve_forward(sys, bc, phi, T, cells);
  Trace trace0 = Trace::from_field(fwd.field, 0);
  Profile bottom = fwd.field.slice(0);
  Profile top = fwd.field.slice(fwd.field.time_steps());
  auto side = solve_sidewise(sys, trace0, bottom, top, cells);
  // compare on the sidewise grid against time-interpolated forward values
  double err = 0.0;
  Trace probe(2, T, fwd.field.time_steps());
  for (int j = 0; j <= cells; ++j) {
    auto col = Trace::from_field(fwd.field, j);
    for (int k = 0; k <= side.field.time_steps(); ++k) {
      std::vector<double> ref(2);
      col.values(side.field.time(k), ref);
      for (int i = 0; i < 2; ++i) err = std::max(err, std::abs(side.field.at(k, j, i) - ref[i]));
    }
  }
  CHECK(err <= 60.0 * 0.01 * sys.length / cells);
}

TEST_CASE("sidewise: degenerate speeds are rejected") {
  auto sys = hyptest::two_speed_system(1e-8, 1.0);
  Trace tr(2, 1.0, 32);
  CHECK_THROWS_AS(solve_sidewise(sys, tr, Profile::zero(2, sys.length, 32), Profile::zero(2, sys.length, 32), 32),
                  SolverError);
}

TEST_CASE("sidewise: trace-only windows shrink one row per side") {
  auto sys = hyptest::two_speed_system();
  Trace tr(2, 2.0 * kPi, 200);
  auto res = solve_sidewise(sys, tr, std::nullopt, std::nullopt, 40);
  CHECK_FALSE(res.full);
  CHECK(res.row_lo[1] == 1);
  CHECK(res.row_hi[1] == res.field.time_steps() - 1);
}

TEST_CASE("enlargement equivalence: nonlocal vs enlarged local solve agree and converge") {
  auto sys = hyptest::two_speed_system();
  const double T = 2.0;
  double prev_diff = 0.0;
  for (int cells : {100, 200}) {
    auto bc = hyptest::two_speed_loop_bc(T);
    auto en = reflect_enlarge(sys, bc);
    Profile phi = hyptest::sine_profile(2, sys.length, cells, 0.01, {1, 2});
    SolveOptions opt;
    auto direct = solve_forward(sys, bc, phi, T, cells, opt);
    SolveOptions opt_en;
    opt_en.cfl = 0.45;  // separate step size so the comparison carries discretization content
    auto closure = make_closure(en.system, en.bc);
    GridField big = solve_forward_closure(en.system, closure, en.enlarge_profile(phi), T, cells, opt_en);
    GridField restricted = en.restrict_field(big);

    // identical spatial grid, different time grids: compare final slices
    double diff = 0.0;
    for (int j = 0; j <= cells; ++j)
      for (int i = 0; i < 2; ++i)
        diff = std::max(diff, std::abs(restricted.at(restricted.time_steps(), j, i) -
                                       direct.field.at(direct.field.time_steps(), j, i)));
    CHECK(diff <= 30.0 * 0.01 * sys.length / cells);
    CHECK(en.reflection_identity_error(big) <= 1e-12);
    if (prev_diff > 0.0) CHECK(prev_diff / diff > 1.3);
    prev_diff = diff;
  }
}

TEST_CASE("convergence study: smooth advection lands near first order") {
  auto sys = hyptest::advection_system();
  const double T = 2.0;
  auto run = [&](int cells) {
    auto bc = hyptest::advection_loop_bc(T);
    Profile phi = Profile::analytic(1, sys.length, cells, [&](double x, std::span<double> out) {
      out[0] = 0.5 * std::sin(2.0 * kPi * x / sys.length);
    });
    auto res = solve_forward(sys, bc, phi, T, cells);
    return res.field.slice(res.field.time_steps());
  };
  SpaceFn exact = [&](double x, std::span<double> out) {
    out[0] = 0.5 * std::sin(2.0 * kPi * (x - T) / sys.length);
  };
  std::vector<int> list{100, 200, 400};
  auto table = convergence_study(run, &exact, list);
  REQUIRE(table.size() == 3);
  for (size_t r = 0; r + 1 < table.size(); ++r) {
    CHECK(table[r].observed_order > 0.8);
    CHECK(table[r].observed_order < 1.2);
  }
}

TEST_CASE("convergence study: zero data flags degenerate rows") {
  auto sys = hyptest::advection_system();
  auto run = [&](int cells) {
    auto bc = hyptest::advection_loop_bc(1.0);
    auto res = solve_forward(sys, bc, Profile::zero(1, sys.length, cells), 1.0, cells);
    return res.field.slice(res.field.time_steps());
  };
  SpaceFn exact = [](double, std::span<double> out) { out[0] = 0.0; };
  std::vector<int> list{50, 100};
  auto table = convergence_study(run, &exact, list);
  CHECK(table[0].degenerate);
  CHECK(std::isnan(table[0].observed_order));
}
