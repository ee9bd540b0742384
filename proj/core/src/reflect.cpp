#include "hypctrl/reflect.hpp"

#include <algorithm>
#include <cmath>

#include "hypctrl/errors.hpp"

namespace hypctrl {

namespace {

// Scratch for the permuted speed/source callbacks; solves are single-threaded
// internally, concurrent solves live on their own threads.
thread_local std::vector<double> tl_v, tl_w, tl_out;

}  // namespace

Profile EnlargedSystem::enlarge_profile(const Profile& phi) const {
  const int n = original_components;
  const int Nx = phi.cells();
  std::vector<double> data(static_cast<size_t>(Nx + 1) * system.components);
  for (int j = 0; j <= Nx; ++j) {
    auto v = phi.state(j);
    auto vr = phi.state(Nx - j);  // phi(L - x) lands back on the grid
    for (int a = 0; a < system.components; ++a) {
      int old = new_to_old[a];
      data[static_cast<size_t>(j) * system.components + a] = old < n ? v[old] : vr[old - n];
    }
  }
  return Profile(system.components, phi.length(), std::move(data));
}

GridField EnlargedSystem::restrict_field(const GridField& enlarged) const {
  const int n = original_components;
  GridField out(n, enlarged.horizon(), enlarged.length(), enlarged.time_steps(), enlarged.cells());
  for (int k = 0; k <= enlarged.time_steps(); ++k)
    for (int j = 0; j <= enlarged.cells(); ++j) {
      auto src = enlarged.state(k, j);
      auto dst = out.state(k, j);
      for (int i = 0; i < n; ++i) dst[i] = src[old_to_new[i]];
    }
  return out;
}

double EnlargedSystem::reflection_identity_error(const GridField& enlarged) const {
  const int n = original_components;
  double sup = 0.0;
  for (int k = 0; k <= enlarged.time_steps(); ++k)
    for (int j = 0; j <= enlarged.cells(); ++j) {
      auto here = enlarged.state(k, j);
      auto mirror = enlarged.state(k, enlarged.cells() - j);
      for (int i = 0; i < n; ++i)
        sup = std::max(sup, std::abs(here[old_to_new[n + i]] - mirror[old_to_new[i]]));
    }
  return sup;
}

EnlargedSystem reflect_enlarge(const DiagonalSystem& sys, const NonlocalBC& bc) {
  {
    ValidationReport report = validate_system(sys, 32);
    if (!report.valid())
      throw SolverError(ErrorCode::ValidationFailed,
                        "reflect_enlarge: system invalid (" + report.issues.front().message + ")");
  }

  const int n = sys.components;
  const int l = sys.negative;
  const int m = sys.positive_begin();

  EnlargedSystem en;
  en.original_components = n;
  auto& order = en.new_to_old;
  order.reserve(2 * n);
  for (int p = 0; p < l; ++p) order.push_back(p);            // speed < 0
  for (int r = m; r < n; ++r) order.push_back(n + r);        // -speed_r < 0
  for (int q = l; q < m; ++q) order.push_back(q);            // speed == 0
  for (int q = l; q < m; ++q) order.push_back(n + q);
  for (int r = m; r < n; ++r) order.push_back(r);            // speed > 0
  for (int p = 0; p < l; ++p) order.push_back(n + p);        // -speed_p > 0
  en.old_to_new.assign(2 * n, 0);
  for (int a = 0; a < 2 * n; ++a) en.old_to_new[order[a]] = a;

  DiagonalSystem& big = en.system;
  big.components = 2 * n;
  big.negative = l + (n - m);
  big.zero = 2 * (m - l);
  big.radius = sys.radius;
  big.length = sys.length;
  big.source_free = sys.source_free;

  auto order_copy = order;  // owned by the lambdas below
  auto base_speeds = sys.speeds;
  auto base_sources = sys.sources;

  auto unpack = [order_copy, n](std::span<const double> big_state) {
    tl_v.resize(n);
    tl_w.resize(n);
    for (int a = 0; a < 2 * n; ++a) {
      int old = order_copy[a];
      (old < n ? tl_v[old] : tl_w[old - n]) = big_state[a];
    }
  };

  big.speeds = [order_copy, n, base_speeds, unpack](std::span<const double> V, std::span<double> out) {
    unpack(V);
    tl_out.resize(2 * n);
    base_speeds(tl_v, std::span<double>(tl_out.data(), n));
    base_speeds(tl_w, std::span<double>(tl_out.data() + n, n));
    for (int a = 0; a < 2 * n; ++a) {
      int old = order_copy[a];
      out[a] = old < n ? tl_out[old] : -tl_out[n + (old - n)];
    }
  };
  big.sources = [order_copy, n, base_sources, unpack](std::span<const double> V, std::span<double> out) {
    unpack(V);
    tl_out.resize(2 * n);
    base_sources(tl_v, std::span<double>(tl_out.data(), n));
    base_sources(tl_w, std::span<double>(tl_out.data() + n, n));
    for (int a = 0; a < 2 * n; ++a) {
      int old = order_copy[a];
      out[a] = old < n ? tl_out[old] : tl_out[n + (old - n)];
    }
  };

  // Boundary maps: at x=0 the reflected copies stand in for the x=L traces of
  // the original relations, and symmetrically at x=L.
  const BcLayout lay = bc.layout();
  auto old_to_new_copy = en.old_to_new;

  for (int r = m; r < n; ++r) en.bc.incoming_at_0.push_back(en.old_to_new[r]);
  for (int p = 0; p < l; ++p) en.bc.incoming_at_0.push_back(en.old_to_new[n + p]);
  for (int r = m; r < n; ++r) en.bc.incoming_at_L.push_back(en.old_to_new[n + r]);
  for (int p = 0; p < l; ++p) en.bc.incoming_at_L.push_back(en.old_to_new[p]);

  en.bc.apply_at_0 = [bc, lay, old_to_new_copy, n, l, m](double t, std::span<double> trace) {
    std::vector<double> w(lay.outgoing_size()), z(lay.incoming_size());
    int idx = 0;
    for (int i = 0; i < m; ++i) w[idx++] = trace[old_to_new_copy[i]];
    for (int i = l; i < n; ++i) w[idx++] = trace[old_to_new_copy[n + i]];
    bc.incoming(t, w, z);
    idx = 0;
    for (int r = m; r < n; ++r) trace[old_to_new_copy[r]] = z[idx++];
    for (int p = 0; p < l; ++p) trace[old_to_new_copy[n + p]] = z[idx++];
  };
  en.bc.apply_at_L = [bc, lay, old_to_new_copy, n, l, m](double t, std::span<double> trace) {
    std::vector<double> w(lay.outgoing_size()), z(lay.incoming_size());
    int idx = 0;
    for (int i = 0; i < m; ++i) w[idx++] = trace[old_to_new_copy[n + i]];
    for (int i = l; i < n; ++i) w[idx++] = trace[old_to_new_copy[i]];
    bc.incoming(t, w, z);
    idx = 0;
    for (int r = m; r < n; ++r) trace[old_to_new_copy[n + r]] = z[idx++];
    for (int p = 0; p < l; ++p) trace[old_to_new_copy[p]] = z[idx++];
  };

  return en;
}

}  // namespace hypctrl
