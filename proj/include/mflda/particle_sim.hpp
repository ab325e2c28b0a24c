#pragma once

// Euler-Maruyama simulation of the N-particle approximation of the
// mean-field descent-ascent SDE
//
//   dX_i = (-alpha * mean(Y) + X_i - X_i^3/3) dt + sqrt(2 eps) dB_i
//   dY_i = ( alpha * mean(X) + Y_i - Y_i^3/3) dt + sqrt(2 eps) dB'_i
//
// plus the moment diagnostics and the oscillating/converged classifier.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mflda/core_dynamics.hpp"
#include "mflda/philox.hpp"

namespace mflda {

struct Ensemble {
  std::vector<double> x;
  std::vector<double> y;
  double t = 0.0;

  std::size_t size() const noexcept { return x.size(); }
};

struct InitSpec {
  enum class Kind { kDirac, kGaussianIid };

  Kind kind = Kind::kDirac;
  double mean_x = 0.0;
  double mean_y = 0.0;
  /// Per-coordinate variance, gaussian only.
  double var = 0.0;

  static InitSpec dirac(double mx, double my) { return {Kind::kDirac, mx, my, 0.0}; }
  static InitSpec gaussian(double mx, double my, double var) {
    return {Kind::kGaussianIid, mx, my, var};
  }
};

/// Throws std::invalid_argument for N == 0 or an inconsistent spec.
Ensemble init_ensemble(const InitSpec& spec, std::size_t n, std::uint64_t seed);

/// Empirical means summed in fixed blocks, then blocks in order, so the result
/// does not depend on the number of threads.
std::pair<double, double> ensemble_means(const Ensemble& e) noexcept;

/// Advances `e` by one Euler-Maruyama step in place. `step` indexes the noise
/// field. Means are frozen from the pre-step state. Throws
/// NumericalBlowupError naming the step and the first offending particle.
void em_step_inplace(const Params& params, Ensemble& e, double dt,
                     const NoiseSource& noise, std::uint64_t step);

/// Value-returning form of em_step_inplace.
Ensemble em_step(const Params& params, Ensemble e, double dt, const NoiseSource& noise,
                 std::uint64_t step);

/// Plain power means (1/N) sum (x_i - mean)^j; no small-sample correction.
struct CenteredMoments {
  double mean_x = 0.0;
  double mean_y = 0.0;
  /// Index j holds the j-th centered moment, j = 0..k_max (j = 0 is 1, j = 1
  /// is 0 up to round-off).
  std::vector<double> x;
  std::vector<double> y;
};

/// Throws std::invalid_argument unless k_max is even and >= 2.
CenteredMoments moments(const Ensemble& e, int k_max);

struct MomentRecord {
  double t = 0.0;
  double mean_x = 0.0;
  double mean_y = 0.0;
  double var_x = 0.0;
  double var_y = 0.0;
  /// Empirical E[X^2 + Y^2].
  double r2_mean = 0.0;
  /// Centered moments 0..k_max per coordinate.
  std::vector<double> cm_x;
  std::vector<double> cm_y;
};

struct MomentSeries {
  std::vector<MomentRecord> records;
  int k_max = 4;

  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }
};

MomentRecord record_moments(const Ensemble& e, int k_max);

struct SimConfig {
  Params params{1.5, 0.25};
  std::size_t n = 500;
  double dt = 1e-3;
  double t_end = 20.0;
  std::uint64_t seed = 0;
  InitSpec init = InitSpec::gaussian(-0.2, 0.4, 0.25);
  std::vector<double> snapshot_times{0.0, 5.0, 12.5, 20.0};
  int k_max = 4;
  std::size_t record_stride = 10;
  /// OpenMP thread count for the particle loop; 0 keeps the runtime default.
  int threads = 0;
  /// Start from this ensemble instead of drawing from `init`.
  std::optional<Ensemble> initial;
};

/// Throws std::invalid_argument describing the first invalid field.
void validate(const SimConfig& config);

struct SimResult {
  MomentSeries series;
  std::vector<Ensemble> snapshots;
  std::uint64_t steps = 0;
};

/// Runs from t = 0 to t_end (round(t_end / dt) steps), recording moments
/// every record_stride steps and at the final step, and snapshots at the
/// grid times nearest to snapshot_times. Moments are recorded up to order
/// max(k_max, 4).
SimResult simulate(const SimConfig& config);

enum class Verdict { kOscillating, kConverged, kUndecided };

std::string to_string(Verdict v);

struct ClassifierConfig {
  double window = 5.0;
  double osc_threshold = 0.5;
  double conv_threshold = 0.1;
  double drift_threshold = 0.05;
};

struct Classification {
  Verdict verdict = Verdict::kUndecided;
  /// Standard deviation of mean_x over the trailing window.
  double mean_x_std = 0.0;
  /// Average of |(mean_x, mean_y)| over the trailing window.
  double mean_radius = 0.0;
  /// |average radius over the second half - over the first half| of the window.
  double radius_drift = 0.0;
  std::size_t window_records = 0;
};

/// Throws std::invalid_argument when the window exceeds half the recorded
/// horizon or the series is too short.
Classification classify(const MomentSeries& series, const ClassifierConfig& config = {});

}  // namespace mflda
