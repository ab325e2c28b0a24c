#pragma once

// Numerical certificate for exponential attraction of the cycle.
//
// With nu the unit normal (F2, -F1)/|F| of the cycle, the Lyapunov function
// g = dist^2(., cycle) satisfies F . grad g = 2 g nu . DF nu + O(g^{3/2}).
// Only the symmetric part of DF enters, and
//
//   -|F|^2 nu . DF nu = (m^2 - 1) F2^2 + (n^2 - 1) F1^2 =: Q(m, n)
//                     = alpha^2 (m^4 + n^4 - m^2 - n^2) + R(m, n).
//
// Positivity of Q on the annulus is checked on a polar grid with an explicit
// Lipschitz margin; this is a numerical sweep, not a proof.

#include <cstddef>
#include <vector>

#include "mflda/core_dynamics.hpp"
#include "mflda/ode_flow.hpp"

namespace mflda {

/// Q(m, n). Not normalized by |F|^2.
double quadratic_form(const Params& params, Point2 p) noexcept;

/// alpha^2 (m^4 + n^4 - m^2 - n^2)
double leading_term(const Params& params, Point2 p) noexcept;

/// Q - leading_term, in closed form:
/// (4 alpha / 3) m n (m^2 - n^2) + (m^2 - 1)(n - n^3/3)^2 + (n^2 - 1)(m - m^3/3)^2
double remainder(const Params& params, Point2 p) noexcept;

struct GridResolution {
  std::size_t radial = 0;
  std::size_t angular = 0;
};

/// Node (i, j) of the polar annulus grid: r^2 uniform on [3, 6] including both
/// ends, theta = 2 pi j / angular.
Point2 annulus_node(const GridResolution& grid, std::size_t i, std::size_t j) noexcept;

/// Largest distance from a point of the annulus to its nearest grid node
/// (half the largest cell diagonal).
double covering_radius(const GridResolution& grid) noexcept;

struct CertReport {
  double alpha = 0.0;
  GridResolution grid;
  double inf_value = 0.0;
  Point2 argmin;
  /// Covering radius times the inflated Lipschitz estimate of Q.
  double lipschitz_margin = 0.0;
  /// Raw Lipschitz estimate from the probe grid (before inflation).
  double lipschitz_estimate = 0.0;
  bool positive = false;
  /// max |R| / alpha over the grid.
  double remainder_constant = 0.0;
  /// Minimum of the leading term over the grid, divided by alpha^2.
  double leading_min_over_alpha2 = 0.0;
  /// Decay rate from decay_check; negative means the decay inequality failed
  /// somewhere in the probed band. Zero until filled in.
  double estimated_c = 0.0;
  double delta_used = 0.0;
};

/// Multiplier applied to the probe-grid Lipschitz estimate.
inline constexpr double kLipschitzInflation = 2.0;

/// Grid sweep of Q over the annulus. Requires radial >= 64 and angular >= 256
/// (std::invalid_argument otherwise). A non-positive verdict is a valid
/// result, not an error.
CertReport certify_annulus(const Params& params, std::size_t radial, std::size_t angular);

/// Default band half-width (in g) probed by decay_check.
inline constexpr double kDefaultDecayDelta = 0.04;

/// Smallest offset magnitude probed along the cycle normals.
inline constexpr double kMinNormalOffset = 1e-3;

struct DecayProbe {
  Point2 z;
  double g = 0.0;
  /// (F . grad g)(z) / g(z)
  double ratio = 0.0;
  std::size_t sample = 0;
  double offset = 0.0;
};

/// Offsets z = p_j + s nu_j with |s| log-spaced in [1e-3, sqrt(delta)], alternating
/// sides, j following a golden-ratio sequence over the cycle samples.
std::vector<DecayProbe> decay_probes(const CycleGeometry& geom, const Params& params,
                                     double delta, std::size_t samples);

/// c = -max over probes of (F . grad g)/g. Throws NeighborhoodError when delta
/// exceeds the projection neighborhood and std::invalid_argument if delta <= 0
/// or samples == 0.
double decay_check(const CycleGeometry& geom, const Params& params, double delta,
                   std::size_t samples);

/// Runs certify_annulus for each alpha and returns the reports in order.
std::vector<CertReport> certify_sweep(const std::vector<double>& alphas, std::size_t radial,
                                      std::size_t angular);

}  // namespace mflda
