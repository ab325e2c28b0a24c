#include "mflda/particle_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "mflda/errors.hpp"

#ifdef MFLDA_HAVE_OPENMP
#include <omp.h>
#endif

namespace mflda {

namespace {

constexpr std::size_t kReductionBlock = 256;

double blocked_sum(const std::vector<double>& v) noexcept {
  double total = 0.0;
  for (std::size_t start = 0; start < v.size(); start += kReductionBlock) {
    const std::size_t stop = std::min(v.size(), start + kReductionBlock);
    double block = 0.0;
    for (std::size_t i = start; i < stop; ++i) block += v[i];
    total += block;
  }
  return total;
}

int thread_count(int requested) {
#ifdef MFLDA_HAVE_OPENMP
  return requested > 0 ? requested : omp_get_max_threads();
#else
  (void)requested;
  return 1;
#endif
}

}  // namespace

Ensemble init_ensemble(const InitSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("init_ensemble: N must be >= 1");
  if (!(spec.var >= 0.0)) throw std::invalid_argument("init_ensemble: var must be >= 0");
  if (spec.kind == InitSpec::Kind::kDirac && spec.var != 0.0) {
    throw std::invalid_argument("init_ensemble: a dirac start has zero variance");
  }
  Ensemble e;
  e.x.assign(n, spec.mean_x);
  e.y.assign(n, spec.mean_y);
  if (spec.kind == InitSpec::Kind::kGaussianIid) {
    const NoiseSource noise(seed);
    const double sd = std::sqrt(spec.var);
    for (std::size_t i = 0; i < n; ++i) {
      const auto [zx, zy] =
          noise.normal_pair(0, static_cast<std::uint32_t>(i), NoiseSource::Domain::kInit);
      e.x[i] += sd * zx;
      e.y[i] += sd * zy;
    }
  }
  return e;
}

std::pair<double, double> ensemble_means(const Ensemble& e) noexcept {
  const auto n = static_cast<double>(e.size());
  return {blocked_sum(e.x) / n, blocked_sum(e.y) / n};
}

void em_step_inplace(const Params& params, Ensemble& e, double dt, const NoiseSource& noise,
                     std::uint64_t step) {
  const auto [mean_x, mean_y] = ensemble_means(e);
  const double pull_x = -params.alpha() * mean_y;
  const double pull_y = params.alpha() * mean_x;
  const double sigma = std::sqrt(2.0 * params.eps() * dt);
  const bool noisy = params.eps() > 0.0;

  const auto n = static_cast<std::ptrdiff_t>(e.size());
  double* xs = e.x.data();
  double* ys = e.y.data();
  std::ptrdiff_t first_bad = n;

#pragma omp parallel for schedule(static) reduction(min : first_bad)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double x = xs[i];
    const double y = ys[i];
    double nx = x + (pull_x + x - x * x * x / 3.0) * dt;
    double ny = y + (pull_y + y - y * y * y / 3.0) * dt;
    if (noisy) {
      const auto [zx, zy] = noise.normal_pair(step, static_cast<std::uint32_t>(i));
      nx += sigma * zx;
      ny += sigma * zy;
    }
    xs[i] = nx;
    ys[i] = ny;
    if (!std::isfinite(nx) || !std::isfinite(ny)) first_bad = std::min(first_bad, i);
  }
  e.t += dt;

  if (first_bad < n) {
    std::ostringstream msg;
    msg << "em_step: non-finite state at step " << step << ", particle " << first_bad
        << "; reduce dt";
    throw NumericalBlowupError(msg.str(), step, static_cast<std::size_t>(first_bad));
  }
}

Ensemble em_step(const Params& params, Ensemble e, double dt, const NoiseSource& noise,
                 std::uint64_t step) {
  em_step_inplace(params, e, dt, noise, step);
  return e;
}

CenteredMoments moments(const Ensemble& e, int k_max) {
  if (k_max < 2 || k_max % 2 != 0) {
    throw std::invalid_argument("moments: k_max must be even and >= 2");
  }
  CenteredMoments out;
  std::tie(out.mean_x, out.mean_y) = ensemble_means(e);
  const auto order = static_cast<std::size_t>(k_max);
  out.x.assign(order + 1, 0.0);
  out.y.assign(order + 1, 0.0);

  // Per-block power sums, then blocks in order.
  std::vector<double> bx(order + 1), by(order + 1);
  for (std::size_t start = 0; start < e.size(); start += kReductionBlock) {
    const std::size_t stop = std::min(e.size(), start + kReductionBlock);
    std::fill(bx.begin(), bx.end(), 0.0);
    std::fill(by.begin(), by.end(), 0.0);
    for (std::size_t i = start; i < stop; ++i) {
      const double dx = e.x[i] - out.mean_x;
      const double dy = e.y[i] - out.mean_y;
      double px = 1.0, py = 1.0;
      for (std::size_t j = 0; j <= order; ++j) {
        bx[j] += px;
        by[j] += py;
        px *= dx;
        py *= dy;
      }
    }
    for (std::size_t j = 0; j <= order; ++j) {
      out.x[j] += bx[j];
      out.y[j] += by[j];
    }
  }
  const auto n = static_cast<double>(e.size());
  for (std::size_t j = 0; j <= order; ++j) {
    out.x[j] /= n;
    out.y[j] /= n;
  }
  return out;
}

MomentRecord record_moments(const Ensemble& e, int k_max) {
  CenteredMoments cm = moments(e, k_max);
  MomentRecord rec;
  rec.t = e.t;
  rec.mean_x = cm.mean_x;
  rec.mean_y = cm.mean_y;
  rec.var_x = cm.x[2];
  rec.var_y = cm.y[2];
  // E[X^2] = var + mean^2 keeps the record consistent with the centered sums.
  rec.r2_mean = rec.var_x + rec.mean_x * rec.mean_x + rec.var_y + rec.mean_y * rec.mean_y;
  rec.cm_x = std::move(cm.x);
  rec.cm_y = std::move(cm.y);
  return rec;
}

void validate(const SimConfig& c) {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument(field + ": " + why);
  };
  if (!c.params.stochastic_ok()) fail("eps", "must lie in [0, 1]");
  if (c.n == 0) fail("N", "must be >= 1");
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) fail("dt", "must be positive");
  if (!(c.t_end >= c.dt)) fail("t_end", "must be >= dt");
  if (c.k_max < 2 || c.k_max % 2 != 0) fail("k_max", "must be even and >= 2");
  if (c.record_stride == 0) fail("record_stride", "must be >= 1");
  if (c.threads < 0) fail("threads", "must be >= 0");
  for (double s : c.snapshot_times) {
    if (!(s >= 0.0 && s <= c.t_end)) fail("snapshot_times", "entries must lie in [0, t_end]");
  }
  if (!(c.init.var >= 0.0)) fail("init.var", "must be >= 0");
  if (c.init.kind == InitSpec::Kind::kDirac && c.init.var != 0.0) {
    fail("init.var", "must be 0 for a dirac start");
  }
  if (c.initial && (c.initial->x.size() != c.initial->y.size() || c.initial->x.empty())) {
    fail("initial", "ensemble must be non-empty with matching x/y lengths");
  }
}

SimResult simulate(const SimConfig& config) {
  validate(config);
#ifdef MFLDA_HAVE_OPENMP
  const int saved_threads = omp_get_max_threads();
  omp_set_num_threads(thread_count(config.threads));
  struct Restore {
    int n;
    ~Restore() { omp_set_num_threads(n); }
  } restore{saved_threads};
#else
  (void)thread_count(config.threads);
#endif

  Ensemble e = config.initial ? *config.initial : init_ensemble(config.init, config.n, config.seed);
  e.t = 0.0;
  const NoiseSource noise(config.seed);
  const auto steps = static_cast<std::uint64_t>(std::llround(config.t_end / config.dt));

  std::vector<std::uint64_t> snap_steps;
  for (double s : config.snapshot_times) {
    snap_steps.push_back(std::min(steps, static_cast<std::uint64_t>(std::llround(s / config.dt))));
  }
  std::vector<std::size_t> snap_order(snap_steps.size());
  std::iota(snap_order.begin(), snap_order.end(), std::size_t{0});
  std::stable_sort(snap_order.begin(), snap_order.end(),
                   [&](std::size_t a, std::size_t b) { return snap_steps[a] < snap_steps[b]; });

  SimResult out;
  out.steps = steps;
  // The moment CSV always carries 3rd and 4th centered moments.
  const int order = std::max(config.k_max, 4);
  out.series.k_max = order;
  out.snapshots.resize(snap_steps.size());
  std::size_t next_snap = 0;
  auto take_snapshots = [&](std::uint64_t k) {
    while (next_snap < snap_order.size() && snap_steps[snap_order[next_snap]] == k) {
      out.snapshots[snap_order[next_snap]] = e;
      ++next_snap;
    }
  };

  out.series.records.reserve(steps / config.record_stride + 2);
  out.series.records.push_back(record_moments(e, order));
  take_snapshots(0);
  for (std::uint64_t k = 1; k <= steps; ++k) {
    em_step_inplace(config.params, e, config.dt, noise, k - 1);
    e.t = static_cast<double>(k) * config.dt;
    if (k % config.record_stride == 0 || k == steps) {
      out.series.records.push_back(record_moments(e, order));
    }
    take_snapshots(k);
  }
  return out;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kOscillating: return "oscillating";
    case Verdict::kConverged: return "converged";
    case Verdict::kUndecided: return "undecided";
  }
  return "undecided";
}

Classification classify(const MomentSeries& series, const ClassifierConfig& config) {
  if (series.size() < 4) throw std::invalid_argument("classify: series too short");
  const auto& recs = series.records;
  const double t_first = recs.front().t;
  const double t_last = recs.back().t;
  if (!(config.window > 0.0) || config.window > 0.5 * (t_last - t_first)) {
    throw std::invalid_argument("classify: window must be positive and at most half the horizon");
  }
  const double t_start = t_last - config.window;
  std::vector<const MomentRecord*> win;
  for (const auto& r : recs) {
    if (r.t >= t_start) win.push_back(&r);
  }

  Classification out;
  out.window_records = win.size();
  const auto count = static_cast<double>(win.size());
  double sum = 0.0, sum_sq = 0.0, radius = 0.0;
  for (const auto* r : win) {
    sum += r->mean_x;
    radius += std::hypot(r->mean_x, r->mean_y);
  }
  const double avg = sum / count;
  for (const auto* r : win) sum_sq += (r->mean_x - avg) * (r->mean_x - avg);
  out.mean_x_std = std::sqrt(sum_sq / count);
  out.mean_radius = radius / count;

  const std::size_t half = win.size() / 2;
  double first = 0.0, second = 0.0;
  for (std::size_t k = 0; k < win.size(); ++k) {
    (k < half ? first : second) += std::hypot(win[k]->mean_x, win[k]->mean_y);
  }
  first /= static_cast<double>(half);
  second /= static_cast<double>(win.size() - half);
  out.radius_drift = std::abs(second - first);

  if (out.mean_x_std >= config.osc_threshold) {
    out.verdict = Verdict::kOscillating;
  } else if (out.mean_x_std <= config.conv_threshold && out.radius_drift <= config.drift_threshold) {
    out.verdict = Verdict::kConverged;
  } else {
    out.verdict = Verdict::kUndecided;
  }
  return out;
}

}  // namespace mflda
