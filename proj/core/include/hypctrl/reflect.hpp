#pragma once

#include <vector>

#include "hypctrl/system.hpp"

namespace hypctrl {

/// Purely local boundary conditions: at each endpoint the incoming components
/// are functions of the same-endpoint trace only.
class LocalBC {
 public:
  using EndpointFn = std::function<void(double t, std::span<double> trace)>;

  std::vector<int> incoming_at_0;  // component indices filled by apply_at_0
  std::vector<int> incoming_at_L;
  EndpointFn apply_at_0;  // overwrites exactly the incoming entries of `trace`
  EndpointFn apply_at_L;
};

/// Result of adjoining the reflected unknowns w_i(t,x) = v_i(t, L-x): a
/// 2n-component system whose nonlocal coupling has become local, with the
/// component order permuted so the speed sign pattern is ascending again.
struct EnlargedSystem {
  DiagonalSystem system;  // 2n components
  LocalBC bc;
  int original_components = 0;
  /// new_to_old[a] is the pre-permutation index: values < n are the original
  /// components, values >= n are their reflected copies.
  std::vector<int> new_to_old;
  std::vector<int> old_to_new;

  /// Initial data (phi(x), phi(L-x)) in the permuted component order.
  Profile enlarge_profile(const Profile& phi) const;

  /// First n components of an enlarged field, back in original order.
  GridField restrict_field(const GridField& enlarged) const;

  /// sup over the grid of |W_i(t,x) - V_i(t, L-x)| where W_i is the reflected
  /// copy of component i; zero up to rounding for any solved enlarged field.
  double reflection_identity_error(const GridField& enlarged) const;
};

/// Builds the enlarged system with reflected speeds Lam_{n+i}(V) = -speed_i(w)
/// and local boundary conditions at both endpoints derived from the nonlocal
/// maps.  `sys` must pass validation.
EnlargedSystem reflect_enlarge(const DiagonalSystem& sys, const NonlocalBC& bc);

}  // namespace hypctrl
