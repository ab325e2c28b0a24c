#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "mflda/io.hpp"

using namespace mflda;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mflda_test_io";
  fs::create_directories(dir);
  return dir / name;
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

}  // namespace

TEST_CASE("reals round-trip through text") {
  for (double v : {0.1, 1.0 / 3.0, -2.718281828459045, 1e-310, 6.02214076e23,
                   std::numeric_limits<double>::max(), 0.0}) {
    CHECK(std::strtod(io::format_real(v).c_str(), nullptr) == v);
  }
  CHECK(io::format_real(0.5) == "0.5");
}

TEST_CASE("trajectory and cycle CSV") {
  const Params p(1.5);
  const LimitCycle cycle = find_limit_cycle(p, 1e-8);
  const fs::path path = scratch("cycle.csv");
  io::write_cycle_csv(path, cycle);
  CHECK(first_line(path) == "t,m,n");

  const io::CsvTable t = io::read_csv(path);
  CHECK(t.columns == std::vector<std::string>{"t", "m", "n"});
  REQUIRE(t.rows.size() == cycle.samples.size());
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    CHECK(t.rows[k][t.column("t")] == cycle.sample_times[k]);
    CHECK(t.rows[k][t.column("m")] == cycle.samples[k].m);
    CHECK(t.rows[k][t.column("n")] == cycle.samples[k].n);
  }
  CHECK_THROWS_AS(t.column("theta"), std::out_of_range);

  // Same input, same bytes.
  const fs::path again = scratch("cycle_again.csv");
  io::write_cycle_csv(again, find_limit_cycle(p, 1e-8));
  std::ifstream a(path), b(again);
  CHECK(std::string(std::istreambuf_iterator<char>(a), {}) ==
        std::string(std::istreambuf_iterator<char>(b), {}));
}

TEST_CASE("cycle descriptor") {
  const LimitCycle cycle = find_limit_cycle(Params(10.0), 1e-8);
  const io::CycleChecks checks = io::check_cycle(cycle);
  CHECK(checks.annulus);
  CHECK(checks.period_bracket);
  CHECK(checks.winding == 1);
  const auto doc = io::cycle_descriptor(cycle, checks);
  for (const char* key : {"alpha", "period", "sample_count", "annulus_check", "winding_number",
                          "period_lower_bound", "period_upper_bound", "period_bracket_check"}) {
    CHECK(doc.contains(key));
  }
  CHECK(doc["sample_count"] == 2048);
  CHECK(doc["period"].get<double>() >= 4 * M_PI / 21);
  CHECK(doc["period"].get<double>() <= 4 * M_PI / 19);

  LimitCycle broken = cycle;
  broken.period *= 2;
  broken.samples[5] = {0.5, 0.5};
  const io::CycleChecks bad = io::check_cycle(broken);
  CHECK_FALSE(bad.annulus);
  CHECK_FALSE(bad.period_bracket);
}

TEST_CASE("sweep CSV and report JSON") {
  CertReport r;
  r.alpha = 100;
  r.grid = {256, 1024};
  r.inf_value = 14999.75;
  r.lipschitz_margin = 8191.5;
  r.positive = true;
  r.estimated_c = 1.64;
  const fs::path path = scratch("sweep.csv");
  io::write_sweep_csv(path, {r, r});
  CHECK(first_line(path) == "alpha,inf_value,lipschitz_margin,positive,estimated_c");
  const io::CsvTable t = io::read_csv(path);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][t.column("positive")] == 1.0);
  CHECK(t.rows[1][t.column("inf_value")] == 14999.75);

  const auto doc = io::to_json(r);
  CHECK(doc["grid_resolution"][1] == 1024);
  CHECK(doc["positive"] == true);
  CHECK(doc.contains("argmin"));
  CHECK(doc.contains("delta_used"));
}

TEST_CASE("moment and snapshot CSV") {
  SimConfig c;
  c.n = 50;
  c.t_end = 0.1;
  c.snapshot_times = {0.05};
  const SimResult r = simulate(c);
  const fs::path mpath = scratch("moments.csv");
  io::write_moment_csv(mpath, r.series);
  CHECK(first_line(mpath) == "t,mean_x,mean_y,var_x,var_y,r2_mean,m3_x,m4_x,m3_y,m4_y");
  const io::CsvTable mt = io::read_csv(mpath);
  REQUIRE(mt.rows.size() == r.series.size());
  CHECK(mt.rows[3][mt.column("m4_y")] == r.series.records[3].cm_y[4]);
  CHECK(mt.rows[3][mt.column("var_x")] == r.series.records[3].var_x);

  const fs::path spath = scratch("snapshot.csv");
  io::write_snapshot_csv(spath, r.snapshots[0]);
  CHECK(first_line(spath) == "i,x,y");
  const io::CsvTable st = io::read_csv(spath);
  REQUIRE(st.rows.size() == 50);
  CHECK(st.rows[49][0] == 49.0);
  CHECK(st.rows[7][st.column("x")] == r.snapshots[0].x[7]);

  MomentSeries low = r.series;
  low.k_max = 2;
  CHECK_THROWS_AS(io::write_moment_csv(mpath, low), std::invalid_argument);
}

TEST_CASE("cycle sweep table") {
  const LimitCycle cycle = find_limit_cycle(Params(100.0), 1e-8);
  const io::CycleSummary s = io::summarize_cycle(cycle);
  CHECK(s.winding == 1);
  CHECK(s.r2_min >= 3.0);
  CHECK(s.r2_max <= 6.0);
  CHECK(s.radius_dev <= 0.1);
  CHECK(std::abs(s.avg_m2 - 2.0) <= 0.1);
  const fs::path path = scratch("cycle_sweep.csv");
  io::write_cycle_sweep_csv(path, {s});
  const io::CsvTable t = io::read_csv(path);
  CHECK(t.columns.size() == 13);
  CHECK(t.rows[0][t.column("period")] == cycle.period);
}

TEST_CASE("malformed CSV is rejected") {
  const fs::path path = scratch("bad.csv");
  {
    std::ofstream out(path);
    out << "t,m,n\n0,1,2\n0,1\n";
  }
  CHECK_THROWS_AS(io::read_csv(path), std::runtime_error);
  {
    std::ofstream out(path);
    out << "t,m,n\n0,abc,2\n";
  }
  CHECK_THROWS_AS(io::read_csv(path), std::runtime_error);
  CHECK_THROWS_AS(io::read_csv(scratch("missing.csv")), std::runtime_error);
}
