#include "mflda/lyapunov_cert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "mflda/errors.hpp"

namespace mflda {

double quadratic_form(const Params& params, Point2 p) noexcept {
  const Point2 f = vector_field(params, p);
  return (p.m * p.m - 1.0) * f.n * f.n + (p.n * p.n - 1.0) * f.m * f.m;
}

double leading_term(const Params& params, Point2 p) noexcept {
  const double a = params.alpha();
  const double m2 = p.m * p.m;
  const double n2 = p.n * p.n;
  return a * a * (m2 * m2 + n2 * n2 - m2 - n2);
}

double remainder(const Params& params, Point2 p) noexcept {
  const double a = params.alpha();
  const double m = p.m, n = p.n;
  const double m2 = m * m, n2 = n * n;
  const double gm = m - m * m2 / 3.0;
  const double gn = n - n * n2 / 3.0;
  return 4.0 * a / 3.0 * m * n * (m2 - n2) + (m2 - 1.0) * gn * gn + (n2 - 1.0) * gm * gm;
}

Point2 annulus_node(const GridResolution& grid, std::size_t i, std::size_t j) noexcept {
  const Annulus annulus;
  const double frac = grid.radial > 1
                          ? static_cast<double>(i) / static_cast<double>(grid.radial - 1)
                          : 0.0;
  const double r = std::sqrt(annulus.r2_min + frac * (annulus.r2_max - annulus.r2_min));
  const double theta =
      2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(grid.angular);
  return {r * std::cos(theta), r * std::sin(theta)};
}

double covering_radius(const GridResolution& grid) noexcept {
  const double dtheta = 2.0 * std::numbers::pi / static_cast<double>(grid.angular);
  double diag = 0.0;
  for (std::size_t i = 0; i + 1 < grid.radial; ++i) {
    const double r0 = annulus_node(grid, i, 0).r();
    const double r1 = annulus_node(grid, i + 1, 0).r();
    const double d2 = r0 * r0 + r1 * r1 - 2.0 * r0 * r1 * std::cos(dtheta);
    diag = std::max(diag, std::sqrt(d2));
  }
  return 0.5 * diag;
}

namespace {

// Largest difference quotient of Q between neighbouring nodes of a grid.
double lipschitz_probe(const Params& params, const GridResolution& grid) {
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.radial; ++i) {
    for (std::size_t j = 0; j < grid.angular; ++j) {
      const Point2 p = annulus_node(grid, i, j);
      const double q = quadratic_form(params, p);
      const Point2 a = annulus_node(grid, i, (j + 1) % grid.angular);
      worst = std::max(worst, std::abs(quadratic_form(params, a) - q) / norm(a - p));
      if (i + 1 < grid.radial) {
        const Point2 b = annulus_node(grid, i + 1, j);
        worst = std::max(worst, std::abs(quadratic_form(params, b) - q) / norm(b - p));
      }
    }
  }
  return worst;
}

}  // namespace

CertReport certify_annulus(const Params& params, std::size_t radial, std::size_t angular) {
  if (radial < 64 || angular < 256) {
    throw std::invalid_argument("certify_annulus: grid must be at least 64 x 256");
  }
  CertReport report;
  report.alpha = params.alpha();
  report.grid = {radial, angular};
  report.inf_value = std::numeric_limits<double>::infinity();
  report.leading_min_over_alpha2 = std::numeric_limits<double>::infinity();

  const double a2 = params.alpha() * params.alpha();
  double r_max = 0.0;
  for (std::size_t i = 0; i < radial; ++i) {
    for (std::size_t j = 0; j < angular; ++j) {
      const Point2 p = annulus_node(report.grid, i, j);
      const double q = quadratic_form(params, p);
      if (q < report.inf_value) {
        report.inf_value = q;
        report.argmin = p;
      }
      report.leading_min_over_alpha2 =
          std::min(report.leading_min_over_alpha2, leading_term(params, p) / a2);
      r_max = std::max(r_max, std::abs(remainder(params, p)));
    }
  }
  report.remainder_constant = r_max / params.alpha();

  // Probe twice as finely as the certification grid.
  report.lipschitz_estimate = lipschitz_probe(params, {2 * radial, 2 * angular});
  report.lipschitz_margin =
      covering_radius(report.grid) * kLipschitzInflation * report.lipschitz_estimate;
  report.positive = report.inf_value - report.lipschitz_margin > 0.0;
  return report;
}

std::vector<DecayProbe> decay_probes(const CycleGeometry& geom, const Params& params,
                                     double delta, std::size_t samples) {
  constexpr double kGoldenFrac = 0.6180339887498949;
  const double s_lo = std::min(kMinNormalOffset, std::sqrt(delta));
  const double log_lo = std::log(s_lo);
  const double log_hi = std::log(std::sqrt(delta));
  const auto& pts = geom.cycle().samples;

  std::vector<DecayProbe> probes;
  probes.reserve(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    const double kk = static_cast<double>(k) + 0.5;
    double frac = kk * kGoldenFrac;
    frac -= std::floor(frac);
    const auto j = std::min(pts.size() - 1, static_cast<std::size_t>(frac * pts.size()));
    const double u = kk / static_cast<double>(samples);
    const double s = std::exp(log_lo + u * (log_hi - log_lo));
    const double side = k % 2 == 0 ? 1.0 : -1.0;

    const Point2 f = vector_field(params, pts[j]);
    const Point2 normal = (1.0 / norm(f)) * Point2{f.n, -f.m};
    const Point2 z = pts[j] + (side * s) * normal;

    const auto pr = geom.project(z);
    if (!(pr.g > 0.0) || pr.g > delta) continue;
    const Point2 grad = 2.0 * (z - pr.proj);
    probes.push_back({z, pr.g, dot(vector_field(params, z), grad) / pr.g, j, side * s});
  }
  return probes;
}

double decay_check(const CycleGeometry& geom, const Params& params, double delta,
                   std::size_t samples) {
  if (!(delta > 0.0)) throw std::invalid_argument("decay_check: delta must be positive");
  if (samples == 0) throw std::invalid_argument("decay_check: need at least one sample");
  if (delta > kProjectionNeighborhood) {
    std::ostringstream msg;
    msg << "decay_check: delta = " << delta << " exceeds the projection neighborhood g <= "
        << kProjectionNeighborhood;
    throw NeighborhoodError(msg.str());
  }
  const auto probes = decay_probes(geom, params, delta, samples);
  if (probes.empty()) throw std::runtime_error("decay_check: no admissible probe points");
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& probe : probes) worst = std::max(worst, probe.ratio);
  return -worst;
}

std::vector<CertReport> certify_sweep(const std::vector<double>& alphas, std::size_t radial,
                                      std::size_t angular) {
  std::vector<CertReport> out;
  out.reserve(alphas.size());
  for (double a : alphas) out.push_back(certify_annulus(Params(a), radial, angular));
  return out;
}

}  // namespace mflda
