#pragma once

// CSV/JSON serialization of trajectories, cycles, certification reports and
// particle runs. All reals are written with 17 significant digits so that a
// round trip through text is exact.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mflda/lyapunov_cert.hpp"
#include "mflda/ode_flow.hpp"
#include "mflda/particle_sim.hpp"

namespace mflda::io {

/// "%.17g"
std::string format_real(double v);

/// Header row of each file schema.
inline constexpr const char* kTrajectoryHeader = "t,m,n";
inline constexpr const char* kSweepHeader = "alpha,inf_value,lipschitz_margin,positive,estimated_c";
inline constexpr const char* kMomentHeader =
    "t,mean_x,mean_y,var_x,var_y,r2_mean,m3_x,m4_x,m3_y,m4_y";
inline constexpr const char* kSnapshotHeader = "i,x,y";

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);
/// One row per sample, t in [0, period); the closing segment is implied.
void write_cycle_csv(const std::filesystem::path& path, const LimitCycle& cycle);
void write_sweep_csv(const std::filesystem::path& path, const std::vector<CertReport>& reports);
/// Requires k_max >= 4 in the series (3rd and 4th centered moments).
void write_moment_csv(const std::filesystem::path& path, const MomentSeries& series);
void write_snapshot_csv(const std::filesystem::path& path, const Ensemble& e);

struct CycleChecks {
  bool annulus = false;
  bool period_bracket = false;
  int winding = 0;
};

CycleChecks check_cycle(const LimitCycle& cycle, double slack = 1e-6);

/// {alpha, period, sample_count, annulus_check, winding_number, ...}
nlohmann::json cycle_descriptor(const LimitCycle& cycle, const CycleChecks& checks);
nlohmann::json to_json(const CertReport& report);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// Per-alpha row of the cycle sweep table.
struct CycleSummary {
  double alpha = 0.0;
  double period = 0.0;
  double period_lower = 0.0;
  double period_upper = 0.0;
  double r2_min = 0.0;
  double r2_max = 0.0;
  int winding = 0;
  double avg_m = 0.0;
  double avg_m2 = 0.0;
  double avg_n2 = 0.0;
  /// max over samples of |r - 2|
  double radius_dev = 0.0;
  double closure_error = 0.0;
  int section_hits = 0;
};

inline constexpr const char* kCycleSweepHeader =
    "alpha,period,period_lower,period_upper,r2_min,r2_max,winding,avg_m,avg_m2,avg_n2,"
    "radius_dev,closure_error,section_hits";

CycleSummary summarize_cycle(const LimitCycle& cycle);
void write_cycle_sweep_csv(const std::filesystem::path& path,
                           const std::vector<CycleSummary>& rows);

/// Numeric CSV with a single header row.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  /// Index of a named column; throws std::out_of_range naming the column.
  std::size_t column(const std::string& name) const;
};

/// Throws std::runtime_error on unreadable files or malformed rows.
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace mflda::io
