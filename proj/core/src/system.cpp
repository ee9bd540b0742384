#include "hypctrl/system.hpp"

#include <algorithm>
#include <cmath>

#include "hypctrl/errors.hpp"
#include "hypctrl/newton.hpp"

namespace hypctrl {

double DiagonalSystem::max_speed(std::span<const double> flat_states) const {
  std::vector<double> lam(components);
  double sup = 0.0;
  std::vector<double> origin(components, 0.0);
  speeds(origin, lam);
  for (double s : lam) sup = std::max(sup, std::abs(s));
  for (size_t off = 0; off + components <= flat_states.size(); off += components) {
    speeds(flat_states.subspan(off, components), lam);
    for (double s : lam) sup = std::max(sup, std::abs(s));
  }
  return sup;
}

double DiagonalSystem::max_speed_in_ball(int samples) const {
  std::vector<double> lam(components);
  double sup = 0.0;
  for (const auto& v : quasirandom_ball(components, radius, samples)) {
    speeds(v, lam);
    for (double s : lam) sup = std::max(sup, std::abs(s));
  }
  std::vector<double> origin(components, 0.0);
  speeds(origin, lam);
  for (double s : lam) sup = std::max(sup, std::abs(s));
  return sup;
}

double DiagonalSystem::min_nonzero_speed_in_ball(int samples) const {
  std::vector<double> lam(components);
  double inf = std::numeric_limits<double>::infinity();
  auto scan = [&](std::span<const double> v) {
    speeds(v, lam);
    for (int i = 0; i < components; ++i)
      if (!is_zero(i)) inf = std::min(inf, std::abs(lam[i]));
  };
  for (const auto& v : quasirandom_ball(components, radius, samples)) scan(v);
  std::vector<double> origin(components, 0.0);
  scan(origin);
  return inf;
}

void BcLayout::gather_outgoing(std::span<const double> v0, std::span<const double> vL,
                               std::span<double> w) const {
  int idx = 0;
  for (int i = 0; i < m; ++i) w[idx++] = v0[i];
  for (int i = l; i < n; ++i) w[idx++] = vL[i];
}

void BcLayout::gather_incoming(std::span<const double> v0, std::span<const double> vL,
                               std::span<double> z) const {
  int idx = 0;
  for (int i = m; i < n; ++i) z[idx++] = v0[i];
  for (int i = 0; i < l; ++i) z[idx++] = vL[i];
}

void BcLayout::scatter_incoming(std::span<const double> z, std::span<double> v0, std::span<double> vL) const {
  int idx = 0;
  for (int i = m; i < n; ++i) v0[i] = z[idx++];
  for (int i = 0; i < l; ++i) vL[i] = z[idx++];
}

NonlocalBC NonlocalBC::from_parts(BcLayout layout, RhsFn g_in, std::vector<Signal> inhomogeneity,
                                  JacFn jacobian) {
  NonlocalBC bc;
  bc.layout_ = layout;
  bc.g_in_ = std::move(g_in);
  bc.jac_ = std::move(jacobian);
  bc.signals_ = std::move(inhomogeneity);
  if (static_cast<int>(bc.signals_.size()) != layout.incoming_size())
    throw SolverError(ErrorCode::BadConfig, "inhomogeneity count must match incoming components");
  return bc;
}

NonlocalBC NonlocalBC::from_rhs(BcLayout layout, RhsFn rhs, std::vector<Signal> signals, JacFn jacobian) {
  NonlocalBC bc;
  bc.layout_ = layout;
  bc.rhs_ = std::move(rhs);
  bc.jac_ = std::move(jacobian);
  bc.signals_ = std::move(signals);
  return bc;
}

void NonlocalBC::incoming(double t, std::span<const double> w, std::span<double> out) const {
  if (rhs_) {
    rhs_(t, w, out);
  } else {
    g_in_(t, w, out);
    for (size_t i = 0; i < signals_.size(); ++i) out[i] += signals_[i](t);
  }
  for (size_t i = 0; i < added_.size(); ++i) out[i] += added_[i](t);
}

void NonlocalBC::jacobian(double t, std::span<const double> w, std::span<double> out) const {
  if (jac_) {
    jac_(t, w, out);
    return;
  }
  auto residual = [&](std::span<const double> ww, std::span<double> oo) { incoming(t, ww, oo); };
  fd_jacobian(w, layout_.incoming_size(), residual, 1e-6, out);
}

std::vector<Signal> NonlocalBC::collected_signals() const {
  std::vector<Signal> all = signals_;
  all.insert(all.end(), added_.begin(), added_.end());
  return all;
}

double NonlocalBC::signals_c1_norm_sum() const {
  double sum = 0.0;
  for (const auto& s : signals_) sum += s.c1_norm();
  for (const auto& s : added_) sum += s.c1_norm();
  return sum;
}

NonlocalBC NonlocalBC::with_inhomogeneity(std::vector<Signal> h) const {
  if (static_cast<int>(h.size()) != layout_.incoming_size())
    throw SolverError(ErrorCode::BadConfig, "inhomogeneity count must match incoming components");
  NonlocalBC bc = *this;
  bc.added_ = std::move(h);
  return bc;
}

double PhysicalChart::round_trip_error(double radius, int samples) const {
  std::vector<double> u(physical_dim), v(diagonal_dim), back(physical_dim);
  double worst = 0.0;
  for (const auto& vd : quasirandom_ball(diagonal_dim, radius, samples)) {
    from_diag(vd, u);
    std::vector<double> diag(diagonal_dim);
    to_diag(u, diag);
    from_diag(diag, back);
    for (int i = 0; i < physical_dim; ++i) worst = std::max(worst, std::abs(back[i] - u[i]));
  }
  return worst;
}

ValidationReport validate_system(const DiagonalSystem& sys, int samples) {
  ValidationReport report;
  const int n = sys.components;
  std::vector<double> lam(n), src(n);
  std::vector<double> origin(n, 0.0);

  auto require_finite = [&](std::span<const double> vals, std::span<const double> at, const char* what) {
    for (double x : vals)
      if (!std::isfinite(x)) {
        std::string loc = "(";
        for (size_t i = 0; i < at.size(); ++i) loc += (i ? "," : "") + std::to_string(at[i]);
        loc += ")";
        throw SolverError(ErrorCode::NonFiniteEvaluation, std::string(what) + " not finite at v=" + loc);
      }
  };

  sys.sources(origin, src);
  require_finite(src, origin, "source");
  for (int i = 0; i < n; ++i)
    if (std::abs(src[i]) > 1e-12)
      report.issues.push_back({ValidationIssue::Kind::SourceAtZero, i, origin, src[i],
                               "source(0) must vanish"});

  auto points = quasirandom_ball(n, sys.radius, std::max(samples, 1));
  std::vector<double> lam2(n);
  for (const auto& v : points) {
    sys.speeds(v, lam);
    require_finite(lam, v, "speed");
    sys.sources(v, src);
    require_finite(src, v, "source");
    for (int i = 0; i < n; ++i) {
      bool ok = sys.is_negative(i) ? lam[i] < 0.0 : sys.is_zero(i) ? lam[i] == 0.0 : lam[i] > 0.0;
      if (!ok)
        report.issues.push_back({ValidationIssue::Kind::SignPattern, i, v, lam[i],
                                 "speed sign violates the declared pattern"});
    }
    // Crude continuity probe: nearby states must give nearby values.
    std::vector<double> v2 = v;
    const double h = 1e-7 * std::max(1.0, sys.radius);
    v2[0] += v2[0] + h <= sys.radius ? h : -h;
    sys.speeds(v2, lam2);
    for (int i = 0; i < n; ++i)
      if (std::abs(lam2[i] - lam[i]) > 1e6 * h * std::max(1.0, std::abs(lam[i]))) {
        report.issues.push_back({ValidationIssue::Kind::Continuity, i, v, lam2[i] - lam[i],
                                 "speed jumps across nearby states"});
        break;
      }
  }
  report.samples_checked = static_cast<int>(points.size());
  return report;
}

double CompatibilityReport::max_c0() const {
  double m = 0.0;
  for (double r : c0_at0) m = std::max(m, r);
  for (double r : c0_atL) m = std::max(m, r);
  return m;
}

double CompatibilityReport::max_c1() const {
  double m = 0.0;
  for (double r : c1_at0) m = std::max(m, r);
  for (double r : c1_atL) m = std::max(m, r);
  return m;
}

CompatibilityReport check_compatibility(const DiagonalSystem& sys, const NonlocalBC& bc, const Profile& phi,
                                        int order) {
  if (phi.cells() < 2) throw SolverError(ErrorCode::GridTooCoarse, "compatibility check needs >= 3 nodes");
  const BcLayout& lay = bc.layout();
  const int n = lay.n;

  std::vector<double> v0(phi.state(0).begin(), phi.state(0).end());
  std::vector<double> vL(phi.state(phi.cells()).begin(), phi.state(phi.cells()).end());
  std::vector<double> w(lay.outgoing_size()), rhs(lay.incoming_size()), z(lay.incoming_size());
  lay.gather_outgoing(v0, vL, w);
  lay.gather_incoming(v0, vL, z);
  bc.incoming(0.0, w, rhs);

  CompatibilityReport report;
  report.c0_at0.assign(n - lay.m, 0.0);
  report.c0_atL.assign(lay.l, 0.0);
  for (int i = 0; i < lay.incoming_size(); ++i) {
    double r = std::abs(z[i] - rhs[i]);
    if (i < n - lay.m)
      report.c0_at0[i] = r;
    else
      report.c0_atL[i - (n - lay.m)] = r;
  }
  if (order < 1) return report;

  // Time derivative of every trace through the PDE: v_i,t = f_i(v) - speed_i(v) v_i,x
  // with one-sided x-derivatives of phi at the endpoints.
  auto trace_dt = [&](int endpoint_node, std::span<const double> v, std::span<double> out) {
    std::vector<double> lam(n), src(n);
    sys.speeds(v, lam);
    sys.sources(v, src);
    for (int i = 0; i < n; ++i) out[i] = src[i] - lam[i] * phi.one_sided_derivative(i, endpoint_node);
  };
  std::vector<double> dv0(n), dvL(n);
  trace_dt(0, v0, dv0);
  trace_dt(phi.cells(), vL, dvL);

  std::vector<double> dw(lay.outgoing_size()), dz(lay.incoming_size());
  lay.gather_outgoing(dv0, dvL, dw);
  lay.gather_incoming(dv0, dvL, dz);

  // d/dt rhs = drhs/dt + J_w . dw/dt, the explicit t-derivative by differences.
  std::vector<double> jac(static_cast<size_t>(lay.incoming_size()) * lay.outgoing_size());
  bc.jacobian(0.0, w, jac);
  const double ht = 1e-6;
  std::vector<double> rhs_p(lay.incoming_size());
  bc.incoming(ht, w, rhs_p);
  std::vector<double> drhs(lay.incoming_size());
  for (int i = 0; i < lay.incoming_size(); ++i) {
    double total = (rhs_p[i] - rhs[i]) / ht;
    for (int jw = 0; jw < lay.outgoing_size(); ++jw)
      total += jac[static_cast<size_t>(i) * lay.outgoing_size() + jw] * dw[jw];
    drhs[i] = total;
  }

  report.c1_at0.assign(n - lay.m, 0.0);
  report.c1_atL.assign(lay.l, 0.0);
  for (int i = 0; i < lay.incoming_size(); ++i) {
    double r = std::abs(dz[i] - drhs[i]);
    if (i < n - lay.m)
      report.c1_at0[i] = r;
    else
      report.c1_atL[i - (n - lay.m)] = r;
  }
  return report;
}

double c1_norm(const Signal& s) { return s.c1_norm(); }
double c1_norm(const Profile& p) { return p.c1_norm(); }
double c1_norm(const GridField& f) { return f.c1_norm(); }

}  // namespace hypctrl
