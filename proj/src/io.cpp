#include "mflda/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mflda::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  auto out = open_out(path);
  out << kTrajectoryHeader << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out << format_real(traj.times[k]) << ',' << format_real(traj.points[k].m) << ','
        << format_real(traj.points[k].n) << '\n';
  }
  finish(out, path);
}

void write_cycle_csv(const std::filesystem::path& path, const LimitCycle& cycle) {
  Trajectory traj{cycle.sample_times, cycle.samples};
  write_trajectory_csv(path, traj);
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<CertReport>& reports) {
  auto out = open_out(path);
  out << kSweepHeader << '\n';
  for (const auto& r : reports) {
    out << format_real(r.alpha) << ',' << format_real(r.inf_value) << ','
        << format_real(r.lipschitz_margin) << ',' << (r.positive ? 1 : 0) << ','
        << format_real(r.estimated_c) << '\n';
  }
  finish(out, path);
}

void write_moment_csv(const std::filesystem::path& path, const MomentSeries& series) {
  if (series.k_max < 4) throw std::invalid_argument("write_moment_csv: need k_max >= 4");
  auto out = open_out(path);
  out << kMomentHeader << '\n';
  for (const auto& r : series.records) {
    out << format_real(r.t) << ',' << format_real(r.mean_x) << ',' << format_real(r.mean_y)
        << ',' << format_real(r.var_x) << ',' << format_real(r.var_y) << ','
        << format_real(r.r2_mean) << ',' << format_real(r.cm_x[3]) << ','
        << format_real(r.cm_x[4]) << ',' << format_real(r.cm_y[3]) << ','
        << format_real(r.cm_y[4]) << '\n';
  }
  finish(out, path);
}

void write_snapshot_csv(const std::filesystem::path& path, const Ensemble& e) {
  auto out = open_out(path);
  out << kSnapshotHeader << '\n';
  for (std::size_t i = 0; i < e.size(); ++i) {
    out << i << ',' << format_real(e.x[i]) << ',' << format_real(e.y[i]) << '\n';
  }
  finish(out, path);
}

CycleChecks check_cycle(const LimitCycle& cycle, double slack) {
  const Params params(cycle.alpha);
  const Annulus annulus;
  CycleChecks checks;
  checks.annulus = !cycle.samples.empty();
  for (const auto& s : cycle.samples) checks.annulus = checks.annulus && annulus.contains(s, slack);
  checks.period_bracket = cycle.period >= period_lower_bound(params) - slack &&
                          cycle.period <= period_upper_bound(params) + slack;
  checks.winding = winding_number(as_closed_trajectory(cycle), {0.0, 0.0});
  return checks;
}

nlohmann::json cycle_descriptor(const LimitCycle& cycle, const CycleChecks& checks) {
  const Params params(cycle.alpha);
  return {
      {"alpha", cycle.alpha},
      {"period", cycle.period},
      {"sample_count", cycle.samples.size()},
      {"annulus_check", checks.annulus},
      {"winding_number", checks.winding},
      {"period_lower_bound", period_lower_bound(params)},
      {"period_upper_bound", period_upper_bound(params)},
      {"period_bracket_check", checks.period_bracket},
      {"closure_error", cycle.closure_error},
      {"section_hits", cycle.section_hits},
  };
}

CycleSummary summarize_cycle(const LimitCycle& cycle) {
  const Params params(cycle.alpha);
  CycleSummary s;
  s.alpha = cycle.alpha;
  s.period = cycle.period;
  s.period_lower = period_lower_bound(params);
  s.period_upper = period_upper_bound(params);
  s.r2_min = std::numeric_limits<double>::infinity();
  s.r2_max = 0.0;
  for (const auto& p : cycle.samples) {
    s.r2_min = std::min(s.r2_min, p.r2());
    s.r2_max = std::max(s.r2_max, p.r2());
    s.radius_dev = std::max(s.radius_dev, std::abs(p.r() - 2.0));
  }
  s.winding = winding_number(as_closed_trajectory(cycle), {0.0, 0.0});
  s.avg_m = time_average(cycle, [](Point2 p) { return p.m; });
  s.avg_m2 = time_average(cycle, [](Point2 p) { return p.m * p.m; });
  s.avg_n2 = time_average(cycle, [](Point2 p) { return p.n * p.n; });
  s.closure_error = cycle.closure_error;
  s.section_hits = cycle.section_hits;
  return s;
}

void write_cycle_sweep_csv(const std::filesystem::path& path,
                           const std::vector<CycleSummary>& rows) {
  auto out = open_out(path);
  out << kCycleSweepHeader << '\n';
  for (const auto& r : rows) {
    out << format_real(r.alpha) << ',' << format_real(r.period) << ','
        << format_real(r.period_lower) << ',' << format_real(r.period_upper) << ','
        << format_real(r.r2_min) << ',' << format_real(r.r2_max) << ',' << r.winding << ','
        << format_real(r.avg_m) << ',' << format_real(r.avg_m2) << ',' << format_real(r.avg_n2)
        << ',' << format_real(r.radius_dev) << ',' << format_real(r.closure_error) << ','
        << r.section_hits << '\n';
  }
  finish(out, path);
}

nlohmann::json to_json(const CertReport& r) {
  return {
      {"alpha", r.alpha},
      {"grid_resolution", {r.grid.radial, r.grid.angular}},
      {"inf_value", r.inf_value},
      {"argmin", {r.argmin.m, r.argmin.n}},
      {"lipschitz_margin", r.lipschitz_margin},
      {"lipschitz_estimate", r.lipschitz_estimate},
      {"positive", r.positive},
      {"remainder_constant", r.remainder_constant},
      {"leading_min_over_alpha2", r.leading_min_over_alpha2},
      {"estimated_c", r.estimated_c},
      {"delta_used", r.delta_used},
  };
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
  finish(out, path);
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (columns[k] == name) return k;
  }
  throw std::out_of_range("missing CSV column '" + name + "'");
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  {
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) table.columns.push_back(cell);
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(row, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0') {
        throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                 ": not a number: '" + cell + "'");
      }
      values.push_back(v);
    }
    if (values.size() != table.columns.size()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected " + std::to_string(table.columns.size()) +
                               " fields");
    }
    table.rows.push_back(std::move(values));
  }
  return table;
}

}  // namespace mflda::io
