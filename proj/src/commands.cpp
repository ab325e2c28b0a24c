#include "mflda/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mflda/config.hpp"
#include "mflda/errors.hpp"
#include "mflda/io.hpp"
#include "mflda/lyapunov_cert.hpp"
#include "mflda/particle_sim.hpp"

#ifndef MFLDA_VERSION
#define MFLDA_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace mflda {

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

// Ensembles smaller than this get a high_variance flag in the manifest.
constexpr std::size_t kSmallEnsemble = 100;

std::string snapshot_name(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "snapshot_t%g.csv", t);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

// Writes the manifest, swallowing nothing: an I/O failure here is exit 1.
int finish(const RunManifest& manifest, const fs::path& out_dir, int code, std::ostream& log) {
  try {
    manifest.write(out_dir);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitFailed;
  }
  return code;
}

}  // namespace

fs::path resolve_out_dir(const std::optional<fs::path>& explicit_dir, const std::string& command) {
  if (explicit_dir && !explicit_dir->empty()) return *explicit_dir;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return fs::path(env) / command;
  return fs::path("out") / command;
}

std::string tool_version() { return MFLDA_VERSION; }

RunManifest::RunManifest(std::string command)
    : command_(std::move(command)), start_(now_seconds()) {}

json RunManifest::to_json() const {
  json doc = {
      {"command", command_},
      {"config", config_},
      {"tool_version", tool_version()},
      {"outputs", outputs_},
      {"wall_time_s", now_seconds() - start_},
      {"verdicts", verdicts_},
  };
  doc["seed"] = seed_ ? json(*seed_) : json(nullptr);
  return doc;
}

void RunManifest::write(const fs::path& out_dir) const {
  io::write_json(out_dir / "manifest.json", to_json());
}

// --- cycle -----------------------------------------------------------------

int run_cycle(const CycleCommand& cmd, std::ostream& log) {
  RunManifest manifest("cycle");
  manifest.set_config({{"alpha", cmd.alpha}, {"tol", cmd.tol}});

  std::optional<Params> params;
  try {
    params.emplace(cmd.alpha);
  } catch (const std::invalid_argument& e) {
    log << "error: alpha: " << e.what() << '\n';
    manifest.verdicts()["error"] = e.what();
    return finish(manifest, cmd.out_dir, kExitFailed, log);
  }

  LimitCycle cycle;
  try {
    cycle = find_limit_cycle(*params, cmd.tol);
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    manifest.verdicts()["error"] = e.what();
    return finish(manifest, cmd.out_dir, kExitNumerical, log);
  }
  log << "cycle: alpha=" << cmd.alpha << " period=" << io::format_real(cycle.period)
      << " hits=" << cycle.section_hits << '\n';

  io::CycleChecks checks;
  try {
    checks = io::check_cycle(cycle);
  } catch (const Error& e) {
    log << "error: winding: " << e.what() << '\n';
  }
  try {
    io::write_cycle_csv(cmd.out_dir / "cycle.csv", cycle);
    manifest.add_output(cmd.out_dir / "cycle.csv");
    io::write_json(cmd.out_dir / "cycle.json", io::cycle_descriptor(cycle, checks));
    manifest.add_output(cmd.out_dir / "cycle.json");
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitFailed;
  }

  std::vector<std::string> failed;
  if (!checks.annulus) failed.emplace_back("annulus containment");
  if (!checks.period_bracket) failed.emplace_back("period bracket");
  if (checks.winding != 1) failed.emplace_back("winding number");
  auto& v = manifest.verdicts();
  v["annulus_check"] = checks.annulus;
  v["period_bracket_check"] = checks.period_bracket;
  v["winding_number"] = checks.winding;
  v["failed_checks"] = failed;
  for (const auto& f : failed) log << "check failed: " << f << '\n';
  return finish(manifest, cmd.out_dir, failed.empty() ? kExitOk : kExitFailed, log);
}

// --- certify ---------------------------------------------------------------

namespace {

std::vector<CertReport> certify_all(const CertifyCommand& cmd, std::size_t radial,
                                    std::size_t angular, std::ostream& log) {
  std::vector<CertReport> reports;
  for (double alpha : cmd.alphas) {
    const Params params(alpha);
    CertReport r = certify_annulus(params, radial, angular);
    if (cmd.decay) {
      try {
        const CycleGeometry geom(find_limit_cycle(params, cmd.tol), params);
        r.estimated_c = decay_check(geom, params, cmd.delta, cmd.samples);
        r.delta_used = cmd.delta;
      } catch (const ConvergenceError& e) {
        log << "warning: alpha=" << alpha << ": no cycle, estimated_c left at 0 (" << e.what()
            << ")\n";
      }
    }
    log << "certify: alpha=" << alpha << " grid=" << radial << "x" << angular
        << " inf=" << io::format_real(r.inf_value)
        << " margin=" << io::format_real(r.lipschitz_margin)
        << " positive=" << (r.positive ? "true" : "false");
    if (cmd.decay) log << " c=" << io::format_real(r.estimated_c);
    log << '\n';
    reports.push_back(r);
  }
  return reports;
}

}  // namespace

int run_certify(const CertifyCommand& cmd, std::ostream& log) {
  RunManifest manifest("certify");
  manifest.set_config({{"alphas", cmd.alphas},
                       {"radial", cmd.radial},
                       {"angular", cmd.angular},
                       {"refine", cmd.refine},
                       {"decay", cmd.decay},
                       {"delta", cmd.delta},
                       {"samples", cmd.samples},
                       {"tol", cmd.tol}});
  try {
    const auto reports = certify_all(cmd, cmd.radial, cmd.angular, log);
    io::write_sweep_csv(cmd.out_dir / "certify_sweep.csv", reports);
    manifest.add_output(cmd.out_dir / "certify_sweep.csv");

    json doc = {{"reports", json::array()}};
    for (const auto& r : reports) doc["reports"].push_back(io::to_json(r));
    json positive = json::object();
    for (const auto& r : reports) positive[io::format_real(r.alpha)] = r.positive;
    manifest.verdicts()["positive"] = positive;

    if (cmd.refine) {
      const auto refined = certify_all(cmd, 2 * cmd.radial, 2 * cmd.angular, log);
      io::write_sweep_csv(cmd.out_dir / "certify_sweep_refined.csv", refined);
      manifest.add_output(cmd.out_dir / "certify_sweep_refined.csv");
      bool stable = true;
      for (std::size_t k = 0; k < reports.size(); ++k) {
        if (reports[k].positive && !refined[k].positive) {
          stable = false;
          log << "refinement: alpha=" << reports[k].alpha << " lost positivity\n";
        }
      }
      doc["refined"] = json::array();
      for (const auto& r : refined) doc["refined"].push_back(io::to_json(r));
      manifest.verdicts()["refinement_consistent"] = stable;
      log << "refinement: verdicts " << (stable ? "unchanged" : "changed")
          << " for previously positive alpha\n";
    }
    io::write_json(cmd.out_dir / "certify.json", doc);
    manifest.add_output(cmd.out_dir / "certify.json");
  } catch (const NeighborhoodError& e) {
    log << "error: delta: " << e.what() << '\n';
    return finish(manifest, cmd.out_dir, kExitFailed, log);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    manifest.verdicts()["error"] = e.what();
    return finish(manifest, cmd.out_dir, kExitFailed, log);
  }
  return finish(manifest, cmd.out_dir, kExitOk, log);
}

// --- simulate --------------------------------------------------------------

int run_simulate(const SimulateCommand& cmd, std::ostream& log) {
  RunManifest manifest("simulate");
  RunConfig config;
  try {
    config = load_run_config(cmd.config);
    if (cmd.seed) config.sim.seed = *cmd.seed;
    validate(config.sim);
  } catch (const std::exception& e) {
    log << "config error: " << e.what() << '\n';
    manifest.verdicts()["error"] = e.what();
    return finish(manifest, cmd.out_dir, kExitFailed, log);
  }
  manifest.set_config(to_json(config));
  manifest.set_seed(config.sim.seed);
  const SimConfig& sim = config.sim;
  log << "simulate: alpha=" << sim.params.alpha() << " eps=" << sim.params.eps()
      << " N=" << sim.n << " dt=" << sim.dt << " t_end=" << sim.t_end << " seed=" << sim.seed
      << '\n';

  SimResult result;
  try {
    result = simulate(sim);
  } catch (const NumericalBlowupError& e) {
    log << "error: " << e.what() << '\n';
    manifest.verdicts()["error"] = e.what();
    manifest.verdicts()["blowup_step"] = e.step();
    return finish(manifest, cmd.out_dir, kExitNumerical, log);
  }

  auto& v = manifest.verdicts();
  try {
    io::write_moment_csv(cmd.out_dir / "moments.csv", result.series);
    manifest.add_output(cmd.out_dir / "moments.csv");
    for (std::size_t k = 0; k < result.snapshots.size(); ++k) {
      const fs::path path = cmd.out_dir / snapshot_name(sim.snapshot_times[k]);
      io::write_snapshot_csv(path, result.snapshots[k]);
      manifest.add_output(path);
    }

    const Point2 start{result.series.records.front().mean_x, result.series.records.front().mean_y};
    const Trajectory det = integrate(Params(sim.params.alpha()), start, sim.t_end, sim.dt);
    io::write_trajectory_csv(cmd.out_dir / "deterministic.csv", det);
    manifest.add_output(cmd.out_dir / "deterministic.csv");

    try {
      const LimitCycle cycle = find_limit_cycle(Params(sim.params.alpha()), 1e-8);
      io::write_cycle_csv(cmd.out_dir / "cycle.csv", cycle);
      manifest.add_output(cmd.out_dir / "cycle.csv");
    } catch (const ConvergenceError& e) {
      log << "warning: no cycle overlay: " << e.what() << '\n';
    }
  } catch (const NumericalBlowupError& e) {
    log << "error: " << e.what() << '\n';
    v["error"] = e.what();
    return finish(manifest, cmd.out_dir, kExitNumerical, log);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitFailed;
  }

  double r2_max = 0.0, m4_max = 0.0;
  for (const auto& r : result.series.records) {
    r2_max = std::max(r2_max, r.r2_mean);
    m4_max = std::max({m4_max, r.cm_x[4], r.cm_y[4]});
  }
  v["r2_mean_max"] = r2_max;
  v["m4_max"] = m4_max;
  v["high_variance"] = sim.n < kSmallEnsemble;
  try {
    const Classification c = classify(result.series, config.classifier);
    v["classifier"] = {{"verdict", to_string(c.verdict)},
                       {"mean_x_std", c.mean_x_std},
                       {"mean_radius", c.mean_radius},
                       {"radius_drift", c.radius_drift},
                       {"window_records", c.window_records}};
    log << "classify: " << to_string(c.verdict) << " (std mean_x=" << c.mean_x_std
        << ", radius=" << c.mean_radius << ", drift=" << c.radius_drift << ")\n";
  } catch (const std::invalid_argument& e) {
    v["classifier"] = {{"verdict", "undecided"}, {"error", e.what()}};
    log << "classify: skipped (" << e.what() << ")\n";
  }
  return finish(manifest, cmd.out_dir, kExitOk, log);
}

// --- sweep -----------------------------------------------------------------

int run_sweep(const SweepCommand& cmd, std::ostream& log) {
  RunManifest manifest("sweep");
  manifest.set_config({{"alphas", cmd.alphas}, {"tol", cmd.tol}});
  std::vector<io::CycleSummary> rows;
  int code = kExitOk;
  json checks = json::object();
  for (double alpha : cmd.alphas) {
    try {
      const LimitCycle cycle = find_limit_cycle(Params(alpha), cmd.tol);
      const io::CycleChecks c = io::check_cycle(cycle);
      rows.push_back(io::summarize_cycle(cycle));
      const bool ok = c.annulus && c.period_bracket && c.winding == 1;
      checks[io::format_real(alpha)] = ok;
      if (!ok) code = std::max(code, kExitFailed);
      log << "sweep: alpha=" << alpha << " period=" << io::format_real(cycle.period)
          << (ok ? " ok" : " check failed") << '\n';
    } catch (const std::invalid_argument& e) {
      log << "error: alpha=" << alpha << ": " << e.what() << '\n';
      checks[io::format_real(alpha)] = false;
      code = std::max(code, kExitFailed);
    } catch (const Error& e) {
      log << "error: alpha=" << alpha << ": " << e.what() << '\n';
      checks[io::format_real(alpha)] = false;
      code = kExitNumerical;
    }
  }
  manifest.verdicts()["cycle_checks"] = checks;
  try {
    io::write_cycle_sweep_csv(cmd.out_dir / "cycle_sweep.csv", rows);
    manifest.add_output(cmd.out_dir / "cycle_sweep.csv");
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitFailed;
  }
  return finish(manifest, cmd.out_dir, code, log);
}

// --- verify ----------------------------------------------------------------

bool TrackingRun::winding_ok() const {
  return !winding_per_period.empty() &&
         std::all_of(winding_per_period.begin(), winding_per_period.end(),
                     [](int w) { return w == 1; });
}

TrackingRun run_tracking(const CycleGeometry& geom, const TrackingConfig& config) {
  if (config.periods < 1) throw std::invalid_argument("run_tracking: periods must be >= 1");
  const double period = geom.cycle().period;
  const double per_period =
      std::max(2000.0, std::ceil(period / 1e-3));
  const auto steps_per_period = static_cast<std::uint64_t>(per_period);

  SimConfig sim;
  sim.params = Params(config.alpha, config.eps);
  sim.n = config.n;
  sim.dt = period / per_period;
  sim.t_end = period * config.periods;
  sim.seed = config.seed;
  sim.init = InitSpec::dirac(geom.cycle().samples.front().m, geom.cycle().samples.front().n);
  sim.snapshot_times.clear();
  sim.record_stride = static_cast<std::size_t>(std::max(1, config.record_stride));
  sim.threads = config.threads;
  const SimResult result = simulate(sim);

  TrackingRun run;
  run.seed = config.seed;
  run.dt = sim.dt;
  const auto& recs = result.series.records;
  for (const auto& r : recs) {
    run.mean_path.times.push_back(r.t);
    run.mean_path.points.push_back({r.mean_x, r.mean_y});
    run.max_spread = std::max(run.max_spread, std::sqrt(r.var_x + r.var_y));
  }

  const TrackResult tr = track_cycle(geom, Params(config.alpha), run.mean_path);
  run.max_dev = tr.max_dev;
  run.tracked = tr.tracked;
  run.warning = tr.warning;
  for (std::size_t k = 0; k < recs.size(); ++k) {
    const Point2 d = run.mean_path.points[k] - tr.tracked.points[k];
    run.max_theorem_gap =
        std::max(run.max_theorem_gap, recs[k].var_x + recs[k].var_y + dot(d, d));
  }

  // Per-period slices of the recorded mean path, boundaries included.
  const double half_dt = 0.5 * sim.dt;
  for (int p = 0; p < config.periods; ++p) {
    const double t0 = static_cast<double>(p * steps_per_period) * sim.dt - half_dt;
    const double t1 = static_cast<double>((p + 1) * steps_per_period) * sim.dt + half_dt;
    Trajectory slice;
    for (std::size_t k = 0; k < recs.size(); ++k) {
      if (recs[k].t >= t0 && recs[k].t <= t1) {
        slice.times.push_back(recs[k].t);
        slice.points.push_back(run.mean_path.points[k]);
      }
    }
    try {
      run.winding_per_period.push_back(
          static_cast<int>(std::lround(swept_angle(slice, {0.0, 0.0}) / (2.0 * std::numbers::pi))));
    } catch (const Error& e) {
      run.winding_per_period.push_back(0);
      if (!run.warning) run.warning = std::string("winding: ") + e.what();
    }
  }
  return run;
}

VerifySummary verify_tracking(const CycleGeometry& geom, const VerifyCommand& cmd) {
  if (cmd.seeds < 1) throw std::invalid_argument("verify: seeds must be >= 1");
  VerifySummary out;
  std::vector<double> devs;
  for (int s = 0; s < cmd.seeds; ++s) {
    TrackingConfig tc = cmd.tracking;
    tc.seed = cmd.tracking.seed + static_cast<std::uint64_t>(s);
    out.runs.push_back(run_tracking(geom, tc));
    devs.push_back(out.runs.back().max_dev);
    if (out.runs.back().winding_ok()) ++out.winding_ok_seeds;
  }
  out.median_max_dev = median(devs);
  out.passed = out.median_max_dev <= cmd.tracking.delta && 2 * out.winding_ok_seeds > cmd.seeds;
  return out;
}

int run_verify(const VerifyCommand& cmd, std::ostream& log) {
  RunManifest manifest("verify");
  const TrackingConfig& tc = cmd.tracking;
  manifest.set_config({{"alpha", tc.alpha},
                       {"eps", tc.eps},
                       {"N", tc.n},
                       {"delta", tc.delta},
                       {"periods", tc.periods},
                       {"seeds", cmd.seeds},
                       {"record_stride", tc.record_stride},
                       {"tol", cmd.tol}});
  manifest.set_seed(tc.seed);
  auto& v = manifest.verdicts();
  v["high_variance"] = tc.n < kSmallEnsemble;
  if (tc.n < kSmallEnsemble) log << "warning: N=" << tc.n << " is high-variance\n";

  VerifySummary summary;
  try {
    const Params params(tc.alpha, tc.eps);
    if (!params.stochastic_ok()) throw std::invalid_argument("eps must lie in [0, 1]");
    if (tc.n == 0) throw std::invalid_argument("N must be >= 1");
    if (!(tc.delta > 0.0)) throw std::invalid_argument("delta must be positive");
    const CycleGeometry geom(find_limit_cycle(Params(tc.alpha), cmd.tol), Params(tc.alpha));
    log << "verify: cycle period=" << io::format_real(geom.cycle().period) << '\n';
    summary = verify_tracking(geom, cmd);

    io::write_cycle_csv(cmd.out_dir / "cycle.csv", geom.cycle());
    manifest.add_output(cmd.out_dir / "cycle.csv");
    const TrackingRun& first = summary.runs.front();
    io::write_trajectory_csv(cmd.out_dir / "mean_path.csv", first.mean_path);
    manifest.add_output(cmd.out_dir / "mean_path.csv");
    io::write_trajectory_csv(cmd.out_dir / "tracked.csv", first.tracked);
    manifest.add_output(cmd.out_dir / "tracked.csv");
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << '\n';
    v["error"] = e.what();
    return finish(manifest, cmd.out_dir, kExitFailed, log);
  } catch (const NumericalBlowupError& e) {
    log << "error: " << e.what() << '\n';
    v["error"] = e.what();
    return finish(manifest, cmd.out_dir, kExitNumerical, log);
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    v["error"] = e.what();
    return finish(manifest, cmd.out_dir, kExitNumerical, log);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitFailed;
  }

  json runs = json::array();
  for (const auto& r : summary.runs) {
    json row = {{"seed", r.seed},
                {"max_dev", r.max_dev},
                {"winding_per_period", r.winding_per_period},
                {"max_spread", r.max_spread},
                {"max_theorem_gap", r.max_theorem_gap},
                {"dt", r.dt}};
    if (r.warning) row["warning"] = *r.warning;
    runs.push_back(row);
    log << "verify: seed=" << r.seed << " max_dev=" << io::format_real(r.max_dev)
        << " winding=";
    for (std::size_t k = 0; k < r.winding_per_period.size(); ++k) {
      log << (k ? "," : "") << r.winding_per_period[k];
    }
    log << '\n';
  }
  v["runs"] = runs;
  v["median_max_dev"] = summary.median_max_dev;
  v["winding_ok_seeds"] = summary.winding_ok_seeds;
  v["passed"] = summary.passed;

  if (!summary.passed) {
    if (summary.median_max_dev > tc.delta) {
      log << "verify failed: median max deviation " << io::format_real(summary.median_max_dev)
          << " exceeds delta " << tc.delta << '\n';
    }
    if (2 * summary.winding_ok_seeds <= cmd.seeds) {
      log << "verify failed: winding advanced by 1 per period for only "
          << summary.winding_ok_seeds << " of " << cmd.seeds << " seeds\n";
    }
    return finish(manifest, cmd.out_dir, kExitFailed, log);
  }
  log << "verify: passed (median max_dev=" << io::format_real(summary.median_max_dev) << ")\n";
  return finish(manifest, cmd.out_dir, kExitOk, log);
}

}  // namespace mflda
