#include "mflda/ode_flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mflda/errors.hpp"

namespace mflda {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool finite(Point2 p) noexcept { return std::isfinite(p.m) && std::isfinite(p.n); }

// Cubic Hermite basis on [0, 1].
struct Hermite {
  double h00, h10, h01, h11;
};

Hermite basis(double u) noexcept {
  const double u2 = u * u;
  const double u3 = u2 * u;
  return {2 * u3 - 3 * u2 + 1, u3 - 2 * u2 + u, -2 * u3 + 3 * u2, u3 - u2};
}

Hermite basis_d1(double u) noexcept {
  const double u2 = u * u;
  return {6 * u2 - 6 * u, 3 * u2 - 4 * u + 1, -6 * u2 + 6 * u, 3 * u2 - 2 * u};
}

Hermite basis_d2(double u) noexcept {
  return {12 * u - 6, 6 * u - 4, -12 * u + 6, 6 * u - 2};
}

double hermite(const Hermite& b, double y0, double d0, double y1, double d1) noexcept {
  return b.h00 * y0 + b.h10 * d0 + b.h01 * y1 + b.h11 * d1;
}

double wrap_angle(double a) noexcept {
  a = std::remainder(a, kTwoPi);
  return a == -std::numbers::pi ? std::numbers::pi : a;
}

}  // namespace

Point2 rk4_step(const Params& params, Point2 p, double h) noexcept {
  const Point2 k1 = vector_field(params, p);
  const Point2 k2 = vector_field(params, p + (h / 2) * k1);
  const Point2 k3 = vector_field(params, p + (h / 2) * k2);
  const Point2 k4 = vector_field(params, p + h * k3);
  return p + (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double period_lower_bound(const Params& params) noexcept {
  return 4.0 * std::numbers::pi / (2.0 * params.alpha() + 1.0);
}

double period_upper_bound(const Params& params) noexcept {
  return 4.0 * std::numbers::pi / (2.0 * params.alpha() - 1.0);
}

double default_step(const Params& params) noexcept {
  return std::min(1e-3, period_upper_bound(params) / 2000.0);
}

Trajectory integrate(const Params& params, Point2 p0, double t_end, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("integrate: dt must be positive");
  }
  if (!(t_end >= dt)) {
    throw std::invalid_argument("integrate: t_end must be >= dt");
  }
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  Trajectory traj;
  traj.times.reserve(steps + 1);
  traj.points.reserve(steps + 1);
  traj.times.push_back(0.0);
  traj.points.push_back(p0);
  Point2 p = p0;
  for (std::size_t k = 1; k <= steps; ++k) {
    p = rk4_step(params, p, dt);
    if (!finite(p)) {
      std::ostringstream msg;
      msg << "integrate: non-finite state at step " << k << " (t = " << k * dt
          << "); reduce dt or the initial radius";
      throw NumericalBlowupError(msg.str(), k);
    }
    traj.times.push_back(static_cast<double>(k) * dt);
    traj.points.push_back(p);
  }
  return traj;
}

LimitCycle find_limit_cycle(const Params& params, double tol, const CycleOptions& options) {
  if (!(tol > 0.0)) throw std::invalid_argument("find_limit_cycle: tol must be positive");
  if (options.sample_count < 4) {
    throw std::invalid_argument("find_limit_cycle: need at least 4 samples");
  }
  const double dt = options.dt > 0.0 ? options.dt : default_step(params);

  struct Hit {
    double t;
    double m;
  };
  std::vector<Hit> hits;

  // Enough steps for max_hits slow turns plus a generous transient.
  const double turn_time = 2.0 * period_upper_bound(params);
  const auto max_steps = static_cast<std::uint64_t>(
      std::ceil((options.max_hits + 20) * turn_time / dt));

  Point2 p = options.seed;
  bool converged = false;
  for (std::uint64_t k = 0; k < max_steps && !converged; ++k) {
    const Point2 q = rk4_step(params, p, dt);
    if (!finite(q)) {
      std::ostringstream msg;
      msg << "find_limit_cycle: non-finite state at step " << k + 1;
      throw NumericalBlowupError(msg.str(), k + 1);
    }
    if (p.n < 0.0 && q.n >= 0.0 && (p.m > 0.0 || q.m > 0.0)) {
      const Point2 fp = vector_field(params, p);
      const Point2 fq = vector_field(params, q);
      double lo = 0.0;
      double hi = 1.0;
      for (int it = 0; it < 60 && (hi - lo) * dt > 1e-3 * tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double nm = hermite(basis(mid), p.n, fp.n * dt, q.n, fq.n * dt);
        (nm < 0.0 ? lo : hi) = mid;
      }
      const double u = 0.5 * (lo + hi);
      const double m_cross = hermite(basis(u), p.m, fp.m * dt, q.m, fq.m * dt);
      if (m_cross > 0.0) {
        hits.push_back({(static_cast<double>(k) + u) * dt, m_cross});
        const auto count = static_cast<int>(hits.size());
        if (count >= options.warmup_hits + 2) {
          const double diff = std::abs(hits[count - 1].m - hits[count - 2].m);
          converged = diff < tol;
        }
        if (!converged && count >= options.max_hits) break;
      }
    }
    p = q;
  }

  if (!converged) {
    const double last = hits.empty() ? std::nan("") : hits.back().m;
    const double prev = hits.size() < 2 ? std::nan("") : hits[hits.size() - 2].m;
    std::ostringstream msg;
    msg << "find_limit_cycle: no convergence after " << hits.size()
        << " section hits (alpha = " << params.alpha() << ", last two m = " << prev
        << ", " << last << ")";
    throw ConvergenceError(msg.str(), prev, last);
  }

  LimitCycle cycle;
  cycle.alpha = params.alpha();
  cycle.period = hits.back().t - hits[hits.size() - 2].t;
  cycle.section_hits = static_cast<int>(hits.size());

  const std::size_t count = options.sample_count;
  const double spacing = cycle.period / static_cast<double>(count);
  const auto substeps = static_cast<std::size_t>(std::ceil(spacing / dt));
  const double h = spacing / static_cast<double>(substeps);

  cycle.samples.reserve(count);
  cycle.sample_times.reserve(count);
  Point2 s{hits.back().m, 0.0};
  for (std::size_t j = 0; j < count; ++j) {
    cycle.samples.push_back(s);
    cycle.sample_times.push_back(static_cast<double>(j) * spacing);
    for (std::size_t k = 0; k < substeps; ++k) s = rk4_step(params, s, h);
  }
  cycle.closure_error = norm(s - cycle.samples.front());
  return cycle;
}

Trajectory as_closed_trajectory(const LimitCycle& cycle) {
  Trajectory traj;
  traj.points = cycle.samples;
  traj.times = cycle.sample_times;
  if (!traj.points.empty()) {
    traj.points.push_back(cycle.samples.front());
    traj.times.push_back(cycle.period);
  }
  return traj;
}

double swept_angle(const Trajectory& traj, Point2 center) {
  double total = 0.0;
  double prev = 0.0;
  for (std::size_t k = 0; k < traj.points.size(); ++k) {
    const Point2 d = traj.points[k] - center;
    if (d.m == 0.0 && d.n == 0.0) {
      throw DegenerateInputError("winding number: path passes through the center");
    }
    const double a = d.theta();
    if (k > 0) {
      const double step = wrap_angle(a - prev);
      if (std::abs(step) >= kWindingStepGuard) {
        std::ostringstream msg;
        msg << "winding number: angle step of " << step << " rad between samples "
            << k - 1 << " and " << k << " is aliased; resample with a smaller dt";
        throw AliasingError(msg.str());
      }
      total += step;
    }
    prev = a;
  }
  return total;
}

int winding_number(const Trajectory& traj, Point2 center) {
  return static_cast<int>(std::lround(swept_angle(traj, center) / kTwoPi));
}

// ---------------------------------------------------------------------------
// CycleGeometry

CycleGeometry::CycleGeometry(LimitCycle cycle, const Params& params)
    : cycle_(std::move(cycle)), params_(params) {
  if (cycle_.samples.size() < 4) {
    throw std::invalid_argument("CycleGeometry: cycle needs at least 4 samples");
  }
  const double spacing = cycle_.sample_spacing();
  tangents_.reserve(cycle_.samples.size());
  for (const Point2& p : cycle_.samples) {
    tangents_.push_back(spacing * vector_field(params_, p));
  }
}

Point2 CycleGeometry::segment_point(std::size_t i, double u) const noexcept {
  const std::size_t j = (i + 1) % size();
  const Hermite b = basis(u);
  const Point2 &p0 = cycle_.samples[i], &p1 = cycle_.samples[j];
  const Point2 &d0 = tangents_[i], &d1 = tangents_[j];
  return {hermite(b, p0.m, d0.m, p1.m, d1.m), hermite(b, p0.n, d0.n, p1.n, d1.n)};
}

Point2 CycleGeometry::segment_velocity(std::size_t i, double u) const noexcept {
  const std::size_t j = (i + 1) % size();
  const Hermite b = basis_d1(u);
  const Point2 &p0 = cycle_.samples[i], &p1 = cycle_.samples[j];
  const Point2 &d0 = tangents_[i], &d1 = tangents_[j];
  return {hermite(b, p0.m, d0.m, p1.m, d1.m), hermite(b, p0.n, d0.n, p1.n, d1.n)};
}

Point2 CycleGeometry::segment_acceleration(std::size_t i, double u) const noexcept {
  const std::size_t j = (i + 1) % size();
  const Hermite b = basis_d2(u);
  const Point2 &p0 = cycle_.samples[i], &p1 = cycle_.samples[j];
  const Point2 &d0 = tangents_[i], &d1 = tangents_[j];
  return {hermite(b, p0.m, d0.m, p1.m, d1.m), hermite(b, p0.n, d0.n, p1.n, d1.n)};
}

Point2 CycleGeometry::curve_point(double s) const noexcept {
  const double count = static_cast<double>(size());
  s = std::fmod(s, count);
  if (s < 0) s += count;
  auto i = static_cast<std::size_t>(s);
  if (i >= size()) i = size() - 1;
  return segment_point(i, s - static_cast<double>(i));
}

CycleGeometry::Projection CycleGeometry::refine_segment(std::size_t i, Point2 z) const noexcept {
  // Minimize phi(u) = |H(u) - z|^2 on [0, 1]; phi'(u) = 2 (H - z) . H'.
  auto dphi = [&](double u) { return dot(segment_point(i, u) - z, segment_velocity(i, u)); };
  auto make = [&](double u) {
    const Point2 h = segment_point(i, u);
    const Point2 d = z - h;
    return Projection{dot(d, d), h, static_cast<double>(i) + u};
  };

  const double d_lo = dphi(0.0);
  const double d_hi = dphi(1.0);
  if (d_lo >= 0.0 && d_hi <= 0.0) {
    // Local maximum inside; the minimum sits at an endpoint.
    const Projection a = make(0.0), b = make(1.0);
    return a.g <= b.g ? a : b;
  }
  if (d_lo >= 0.0) return make(0.0);
  if (d_hi <= 0.0) return make(1.0);

  // Safeguarded Newton on the bracketed root of phi'.
  double lo = 0.0, hi = 1.0;
  double u = 0.5;
  const double seg_len = std::max(norm(tangents_[i]), 1e-300);
  for (int it = 0; it < 60; ++it) {
    const Point2 h = segment_point(i, u);
    const Point2 v = segment_velocity(i, u);
    const Point2 a = segment_acceleration(i, u);
    const double f = dot(h - z, v);
    const double fp = dot(v, v) + dot(h - z, a);
    if (f < 0.0) lo = u; else hi = u;
    double next = fp > 0.0 ? u - f / fp : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - u);
    u = next;
    if (step * seg_len < 1e-6 * kRefinementTolerance) break;
  }
  return make(u);
}

CycleGeometry::Projection CycleGeometry::project(Point2 z) const noexcept {
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < size(); ++k) {
    const Point2 d = cycle_.samples[k] - z;
    const double d2 = dot(d, d);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = k;
    }
  }
  const std::size_t before = (best + size() - 1) % size();
  Projection left = refine_segment(before, z);
  Projection right = refine_segment(best, z);
  Projection out = left.g < right.g ? left : right;
  if (best_d2 <= out.g) {
    out = {best_d2, cycle_.samples[best], static_cast<double>(best)};
  }
  return out;
}

CycleGeometry::Projection distance_to_cycle(const CycleGeometry& geom, Point2 z) {
  return geom.project(z);
}

double time_average(const LimitCycle& cycle, const std::function<double(Point2)>& observable) {
  const std::size_t count = cycle.samples.size();
  if (count == 0 || !(cycle.period > 0.0)) {
    throw std::invalid_argument("time_average: invalid cycle");
  }
  const double h = cycle.sample_spacing();
  double sum = 0.0;
  double first = observable(cycle.samples[0]);
  double prev = first;
  for (std::size_t j = 1; j <= count; ++j) {
    const double cur = j < count ? observable(cycle.samples[j]) : first;
    sum += 0.5 * (prev + cur) * h;
    prev = cur;
  }
  return sum / cycle.period;
}

TrackResult track_cycle(const CycleGeometry& geom, const Params& params,
                        const Trajectory& mean_path, double neighborhood) {
  if (mean_path.empty()) throw std::invalid_argument("track_cycle: empty mean path");

  TrackResult out;
  const auto start = geom.project(mean_path.points.front());
  out.initial_g = start.g;
  if (start.g > neighborhood) {
    std::ostringstream msg;
    msg << "projection may be ill-defined: g(p_t0) = " << start.g
        << " exceeds the neighborhood bound " << neighborhood;
    out.warning = msg.str();
  }

  out.tracked.times = mean_path.times;
  out.tracked.points.reserve(mean_path.size());
  Point2 p = start.proj;
  out.tracked.points.push_back(p);
  const double dt = default_step(params);
  for (std::size_t k = 1; k < mean_path.size(); ++k) {
    const double span = mean_path.times[k] - mean_path.times[k - 1];
    const auto substeps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(span / dt)));
    const double h = span / static_cast<double>(substeps);
    for (std::size_t s = 0; s < substeps; ++s) p = rk4_step(params, p, h);
    out.tracked.points.push_back(p);
  }
  for (std::size_t k = 0; k < mean_path.size(); ++k) {
    out.max_dev = std::max(out.max_dev, norm(mean_path.points[k] - out.tracked.points[k]));
  }
  return out;
}

double aligned_max_distance(const LimitCycle& a, const LimitCycle& b) {
  const std::size_t count = a.samples.size();
  if (count == 0 || b.samples.size() != count) {
    throw std::invalid_argument("aligned_max_distance: cycles must have equal sample counts");
  }
  std::size_t best_shift = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t shift = 0; shift < count; ++shift) {
    double sum = 0.0;
    for (std::size_t j = 0; j < count && sum < best; ++j) {
      const Point2 d = a.samples[j] - b.samples[(j + shift) % count];
      sum += dot(d, d);
    }
    if (sum < best) {
      best = sum;
      best_shift = shift;
    }
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < count; ++j) {
    worst = std::max(worst, norm(a.samples[j] - b.samples[(j + best_shift) % count]));
  }
  return worst;
}

}  // namespace mflda
