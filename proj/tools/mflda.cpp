// mflda: limit cycles, attraction certificates and particle simulations of
// mean-field Langevin descent-ascent on the double-well bilinear game.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mflda/commands.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Mean-field Langevin descent-ascent experiments.\n"
               "Outputs go to --out, else $MFLDA_OUT_DIR/<command>, else out/<command>.\n"
               "Exit codes: 0 ok, 1 verification or config failure, 2 numerical failure."};
  app.set_version_flag("--version", mflda::tool_version());
  app.require_subcommand(1);

  std::optional<fs::path> out;
  auto add_out = [&out](CLI::App* sub) {
    sub->add_option("-o,--out", out, "Output directory (path; created if missing)");
  };

  mflda::CycleCommand cycle;
  auto* cyc = app.add_subcommand("cycle", "Locate the limit cycle and check annulus, period and winding");
  cyc->add_option("--alpha", cycle.alpha, "Interaction strength alpha (dimensionless, >= 1)")
      ->required();
  cyc->add_option("--tol", cycle.tol,
                  "Agreement of successive section hits (distance in the (m, n) plane)")
      ->capture_default_str();
  add_out(cyc);

  mflda::CertifyCommand cert;
  auto* cer = app.add_subcommand("certify", "Grid-certify positivity of the normal-contraction form");
  cer->add_option("--alpha", cert.alphas, "One or more alpha values (dimensionless, >= 1)")
      ->required();
  cer->add_option("--radial", cert.radial, "Radial grid nodes over r^2 in [3, 6] (count, >= 64)")
      ->capture_default_str();
  cer->add_option("--angular", cert.angular, "Angular grid nodes over [0, 2 pi) (count, >= 256)")
      ->capture_default_str();
  cer->add_flag("--refine", cert.refine, "Repeat on the doubled grid and compare verdicts");
  cer->add_flag("!--no-decay", cert.decay, "Skip the decay-rate estimate along the cycle");
  cer->add_option("--delta", cert.delta,
                  "Band probed by the decay estimate (squared distance, <= 0.25)")
      ->capture_default_str();
  cer->add_option("--samples", cert.samples, "Probe points for the decay estimate (count)")
      ->capture_default_str();
  add_out(cer);

  mflda::SimulateCommand sim;
  std::optional<std::uint64_t> sim_seed;
  auto* simc = app.add_subcommand("simulate", "Run the particle system from a config file");
  simc->add_option("config", sim.config, "Config file ([model], [init], [sim], [classifier])")
      ->required()
      ->check(CLI::ExistingFile);
  simc->add_option("--seed", sim_seed, "Override sim.seed (non-negative integer)");
  add_out(simc);

  mflda::VerifyCommand ver;
  auto* verc = app.add_subcommand(
      "verify", "Track the empirical mean against the deterministic cycle from a Dirac start");
  verc->add_option("--alpha", ver.tracking.alpha, "Interaction strength (dimensionless, >= 1)")
      ->capture_default_str();
  verc->add_option("--eps", ver.tracking.eps, "Noise temperature epsilon (dimensionless, [0, 1])")
      ->capture_default_str();
  verc->add_option("-N,--particles", ver.tracking.n, "Particle count (count, >= 1)")
      ->capture_default_str();
  verc->add_option("--delta", ver.tracking.delta,
                   "Allowed tracking deviation (distance in the (m, n) plane)")
      ->capture_default_str();
  verc->add_option("--periods", ver.tracking.periods, "Simulated horizon (cycle periods)")
      ->capture_default_str();
  verc->add_option("--seeds", ver.seeds, "Independent repetitions (count); the median is reported")
      ->capture_default_str();
  verc->add_option("--seed", ver.tracking.seed, "First seed (non-negative integer)")
      ->capture_default_str();
  verc->add_option("--record-stride", ver.tracking.record_stride,
                   "Record the mean every k Euler-Maruyama steps (steps)")
      ->capture_default_str();
  verc->add_option("--threads", ver.tracking.threads, "OpenMP threads (count; 0 = runtime default)")
      ->capture_default_str();
  add_out(verc);

  mflda::SweepCommand sweep;
  auto* swc = app.add_subcommand("sweep", "Tabulate cycle period, radius and time averages over alpha");
  swc->add_option("--alpha", sweep.alphas, "Alpha values (dimensionless, >= 1)")
      ->capture_default_str();
  swc->add_option("--tol", sweep.tol, "Section-hit agreement (distance in the (m, n) plane)")
      ->capture_default_str();
  add_out(swc);

  CLI11_PARSE(app, argc, argv);

  if (cyc->parsed()) {
    cycle.out_dir = mflda::resolve_out_dir(out, "cycle");
    return mflda::run_cycle(cycle, std::cerr);
  }
  if (cer->parsed()) {
    cert.out_dir = mflda::resolve_out_dir(out, "certify");
    return mflda::run_certify(cert, std::cerr);
  }
  if (simc->parsed()) {
    sim.out_dir = mflda::resolve_out_dir(out, "simulate");
    sim.seed = sim_seed;
    return mflda::run_simulate(sim, std::cerr);
  }
  if (verc->parsed()) {
    ver.out_dir = mflda::resolve_out_dir(out, "verify");
    return mflda::run_verify(ver, std::cerr);
  }
  sweep.out_dir = mflda::resolve_out_dir(out, "sweep");
  return mflda::run_sweep(sweep, std::cerr);
}
