#pragma once

// Deterministic mean dynamics: fixed-step RK4 integration, limit-cycle
// extraction through the Poincare section {n = 0, m > 0}, winding numbers,
// nearest-point geometry of the cycle, time averages and cycle tracking.

#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "mflda/core_dynamics.hpp"

namespace mflda {

/// Uniformly sampled solution of the planar ODE.
struct Trajectory {
  std::vector<double> times;
  std::vector<Point2> points;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
};

/// One classical RK4 step of dp/dt = F(p).
Point2 rk4_step(const Params& params, Point2 p, double h) noexcept;

/// Default step min(1e-3, T_guess / 2000) with T_guess = 4 pi / (2 alpha - 1).
double default_step(const Params& params) noexcept;

/// Lower/upper period bracket 4 pi / (2 alpha +- 1).
double period_lower_bound(const Params& params) noexcept;
double period_upper_bound(const Params& params) noexcept;

/// Integrates from p0 with round(t_end / dt) RK4 steps; sample k sits at
/// exactly k * dt. Throws std::invalid_argument on a bad step or horizon and
/// NumericalBlowupError (carrying the first bad step) on overflow.
Trajectory integrate(const Params& params, Point2 p0, double t_end, double dt);

/// Closed orbit sampled at uniform time spacing over exactly one period.
/// Sample j sits at time j * period / samples.size(); the closing segment
/// back to samples[0] is implied.
struct LimitCycle {
  double alpha = 0.0;
  double period = 0.0;
  std::vector<Point2> samples;
  std::vector<double> sample_times;
  /// |p(period) - p(0)| of the re-integrated orbit.
  double closure_error = 0.0;
  /// Number of section hits consumed before convergence.
  int section_hits = 0;

  double sample_spacing() const noexcept {
    return period / static_cast<double>(samples.size());
  }
};

struct CycleOptions {
  Point2 seed{2.0, 0.0};
  int max_hits = 200;
  /// Section hits discarded before successive hits are compared.
  int warmup_hits = 5;
  std::size_t sample_count = 2048;
  /// Integration step; 0 selects default_step().
  double dt = 0.0;
};

/// Locates the attracting cycle. Throws ConvergenceError when two successive
/// section hits do not agree to `tol` within `max_hits`.
LimitCycle find_limit_cycle(const Params& params, double tol,
                            const CycleOptions& options = {});

/// The cycle as a closed trajectory (first sample repeated at t = period).
Trajectory as_closed_trajectory(const LimitCycle& cycle);

/// Largest absolute angle increment (radians) tolerated between consecutive
/// samples before a winding count is considered aliased.
inline constexpr double kWindingStepGuard = std::numbers::pi / 2.0;

/// Signed number of turns of the path around `center`, rounded to the
/// nearest integer. Throws DegenerateInputError if a point equals the center
/// and AliasingError if any single step turns by kWindingStepGuard or more.
int winding_number(const Trajectory& traj, Point2 center);

/// Total unwrapped angle swept by the path around `center`, in radians.
double swept_angle(const Trajectory& traj, Point2 center);

/// Nearest-point queries against a sampled cycle. The cycle is treated as the
/// piecewise cubic Hermite curve through the samples whose knot tangents are
/// the field itself (samples lie on an orbit), so the curve is C1 and the
/// squared distance is differentiable wherever the projection is unique.
class CycleGeometry {
 public:
  CycleGeometry(LimitCycle cycle, const Params& params);

  const LimitCycle& cycle() const noexcept { return cycle_; }
  const Params& params() const noexcept { return params_; }
  std::size_t size() const noexcept { return cycle_.samples.size(); }

  /// Point on the curve at continuous knot coordinate s in [0, size()).
  Point2 curve_point(double s) const noexcept;

  struct Projection {
    /// Squared distance.
    double g = 0.0;
    Point2 proj;
    /// Knot coordinate of proj (time = param * sample_spacing()).
    double param = 0.0;
  };

  Projection project(Point2 z) const noexcept;

 private:
  Point2 segment_point(std::size_t i, double u) const noexcept;
  Point2 segment_velocity(std::size_t i, double u) const noexcept;
  Point2 segment_acceleration(std::size_t i, double u) const noexcept;
  Projection refine_segment(std::size_t i, Point2 z) const noexcept;

  LimitCycle cycle_;
  Params params_;
  /// Knot tangents with respect to the unit segment parameter.
  std::vector<Point2> tangents_;
};

/// Accuracy target of the segment refinement, as a distance.
inline constexpr double kRefinementTolerance = 1e-7;

/// Squared distance from z to the cycle and the minimizing point.
CycleGeometry::Projection distance_to_cycle(const CycleGeometry& geom, Point2 z);

/// Periodic trapezoidal average of `observable` over one period.
double time_average(const LimitCycle& cycle,
                    const std::function<double(Point2)>& observable);

struct TrackResult {
  double max_dev = 0.0;
  Trajectory tracked;
  /// g at the first mean-path point.
  double initial_g = 0.0;
  /// Set when initial_g exceeds the neighborhood bound.
  std::optional<std::string> warning;
};

/// Default trust region for the projection: g <= 0.25, i.e. distance <= 0.5.
inline constexpr double kProjectionNeighborhood = 0.25;

/// Integrates the deterministic flow from the projection of the first point
/// of `mean_path` and compares it with the path at the path's own times.
/// Throws std::invalid_argument on an empty path.
TrackResult track_cycle(const CycleGeometry& geom, const Params& params,
                        const Trajectory& mean_path,
                        double neighborhood = kProjectionNeighborhood);

/// Smallest maximum pointwise distance between two equally sampled cycles,
/// over discrete time shifts chosen by least mean squared distance.
double aligned_max_distance(const LimitCycle& a, const LimitCycle& b);

}  // namespace mflda
