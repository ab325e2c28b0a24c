#pragma once

// Experiment drivers behind the `mflda` CLI. Each run_* call writes its
// artifacts into out_dir, writes manifest.json last, and returns the process
// exit code: 0 success, 1 verification or configuration failure, 2 numerical
// failure.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mflda/core_dynamics.hpp"
#include "mflda/ode_flow.hpp"

namespace mflda {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitNumerical = 2;

/// Environment variable naming the default output root.
inline constexpr const char* kOutDirEnv = "MFLDA_OUT_DIR";

/// `explicit_dir` if set, else $MFLDA_OUT_DIR/<command>, else out/<command>.
std::filesystem::path resolve_out_dir(const std::optional<std::filesystem::path>& explicit_dir,
                                      const std::string& command);

std::string tool_version();

/// Accumulates the run manifest; write() must be the last file written.
class RunManifest {
 public:
  explicit RunManifest(std::string command);

  void set_config(nlohmann::json config) { config_ = std::move(config); }
  void set_seed(std::uint64_t seed) { seed_ = seed; }
  void add_output(const std::filesystem::path& path) { outputs_.push_back(path.string()); }
  nlohmann::json& verdicts() { return verdicts_; }

  nlohmann::json to_json() const;
  void write(const std::filesystem::path& out_dir) const;

 private:
  std::string command_;
  nlohmann::json config_ = nlohmann::json::object();
  std::optional<std::uint64_t> seed_;
  std::vector<std::string> outputs_;
  nlohmann::json verdicts_ = nlohmann::json::object();
  double start_;
};

struct CycleCommand {
  double alpha = 0.0;
  double tol = 1e-8;
  std::filesystem::path out_dir;
};
int run_cycle(const CycleCommand& cmd, std::ostream& log);

struct CertifyCommand {
  std::vector<double> alphas;
  std::size_t radial = 256;
  std::size_t angular = 1024;
  /// Also re-run every alpha on the doubled grid.
  bool refine = false;
  /// Run decay_check on each alpha's cycle to fill estimated_c.
  bool decay = true;
  double delta = 0.04;
  std::size_t samples = 2000;
  double tol = 1e-8;
  std::filesystem::path out_dir;
};
int run_certify(const CertifyCommand& cmd, std::ostream& log);

struct SimulateCommand {
  std::filesystem::path config;
  std::filesystem::path out_dir;
  /// Overrides sim.seed from the file when set.
  std::optional<std::uint64_t> seed;
};
int run_simulate(const SimulateCommand& cmd, std::ostream& log);

struct SweepCommand {
  std::vector<double> alphas{1.0, 1.5, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0};
  double tol = 1e-8;
  std::filesystem::path out_dir;
};
int run_sweep(const SweepCommand& cmd, std::ostream& log);

// ---------------------------------------------------------------------------
// Cycle tracking of the stochastic mean path (the `verify` pipeline).

struct TrackingConfig {
  double alpha = 20.0;
  double eps = 1e-3;
  std::size_t n = 10000;
  double delta = 0.1;
  int periods = 3;
  std::uint64_t seed = 0;
  int record_stride = 4;
  int threads = 0;
};

struct TrackingRun {
  std::uint64_t seed = 0;
  double max_dev = 0.0;
  /// Rounded turns of the empirical mean around the origin, per period.
  std::vector<int> winding_per_period;
  /// max_t sqrt(var_x + var_y)
  double max_spread = 0.0;
  /// max_t E|X - m_bar|^2 + E|Y - n_bar|^2 along the tracked path.
  double max_theorem_gap = 0.0;
  double dt = 0.0;
  Trajectory mean_path;
  Trajectory tracked;
  std::optional<std::string> warning;

  bool winding_ok() const;
};

/// Simulates from a Dirac start at cycle.samples[0] over `periods` periods and
/// tracks the empirical mean against the deterministic flow. The step is
/// period / max(2000, ceil(period / 1e-3)) so period ends fall on the grid.
TrackingRun run_tracking(const CycleGeometry& geom, const TrackingConfig& config);

struct VerifyCommand {
  TrackingConfig tracking;
  int seeds = 5;
  double tol = 1e-8;
  std::filesystem::path out_dir;
};

struct VerifySummary {
  std::vector<TrackingRun> runs;
  double median_max_dev = 0.0;
  /// Number of seeds whose winding advanced by exactly 1 in every period.
  int winding_ok_seeds = 0;
  bool passed = false;
};

/// Runs tracking for seeds seed, seed+1, ...; passes when the median max
/// deviation is <= delta and a majority of seeds wind once per period.
VerifySummary verify_tracking(const CycleGeometry& geom, const VerifyCommand& cmd);

int run_verify(const VerifyCommand& cmd, std::ostream& log);

}  // namespace mflda
