#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <optional>
#include <random>

#include "mflda/errors.hpp"
#include "mflda/lyapunov_cert.hpp"

using namespace mflda;

namespace {

std::vector<Point2> annulus_sample(std::size_t count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> r2(3.0, 6.0);
  std::uniform_real_distribution<double> th(0.0, 2 * std::numbers::pi);
  std::vector<Point2> out(count);
  for (auto& p : out) {
    const double r = std::sqrt(r2(rng));
    const double t = th(rng);
    p = {r * std::cos(t), r * std::sin(t)};
  }
  return out;
}

// Q written out from the field, independently of the library.
double q_oracle(double a, Point2 p) {
  const double f1 = -a * p.n + p.m - p.m * p.m * p.m / 3;
  const double f2 = a * p.m + p.n - p.n * p.n * p.n / 3;
  return (p.m * p.m - 1) * f2 * f2 + (p.n * p.n - 1) * f1 * f1;
}

// Brute-force minimum of Q over the polar grid, the library's node layout
// redone by hand.
double brute_min(double a, std::size_t radial, std::size_t angular) {
  double best = 1e300;
  for (std::size_t i = 0; i < radial; ++i) {
    const double r = std::sqrt(3.0 + 3.0 * static_cast<double>(i) / (radial - 1));
    for (std::size_t j = 0; j < angular; ++j) {
      const double t = 2 * std::numbers::pi * static_cast<double>(j) / angular;
      best = std::min(best, q_oracle(a, {r * std::cos(t), r * std::sin(t)}));
    }
  }
  return best;
}

std::optional<double> smallest_certified(const std::vector<double>& alphas, std::size_t radial,
                                         std::size_t angular) {
  for (double a : alphas) {
    if (certify_annulus(Params(a), radial, angular).positive) return a;
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("quadratic form hand values") {
  for (double a : {1.0, 3.0, 100.0}) {
    CHECK(quadratic_form(Params(a), {std::sqrt(3.0), 0.0}) ==
          doctest::Approx(6 * a * a).epsilon(1e-14));
    CHECK(std::abs(remainder(Params(a), {std::sqrt(3.0), 0.0})) < 1e-12 * a);
    CHECK(remainder(Params(a), {0.0, 0.0}) == 0.0);
  }
  CHECK(quadratic_form(Params(1.0), {1.0, 1.0}) == 0.0);
}

TEST_CASE("decomposition into leading term and remainder") {
  for (double a : {1.0, 2.0, 10.0, 100.0}) {
    const Params p(a);
    for (const Point2& z : annulus_sample(10000, 17)) {
      const double q = quadratic_form(p, z);
      CHECK(std::abs(q - q_oracle(a, z)) <= 1e-12 * std::abs(q_oracle(a, z)) + 1e-12);
      const double sum = a * a * (std::pow(z.m, 4) + std::pow(z.n, 4) - z.r2()) + remainder(p, z);
      CHECK(std::abs(q - sum) <= 1e-9 * std::abs(q));
      CHECK(leading_term(p, z) ==
            doctest::Approx(a * a * (std::pow(z.m, 4) + std::pow(z.n, 4) - z.r2())).epsilon(1e-13));
    }
  }
}

TEST_CASE("quadratic form symmetries") {
  const Params p(7.0);
  for (const Point2& z : annulus_sample(1000, 23)) {
    const double q = quadratic_form(p, z);
    CHECK(quadratic_form(p, {-z.m, -z.n}) == q);
    CHECK(quadratic_form(p, quarter_turn(z)) == doctest::Approx(q).epsilon(1e-13));
  }
}

TEST_CASE("leading term is at least 3/2 alpha^2 on the grid") {
  for (double a : {1.0, 10.0, 100.0}) {
    const Params p(a);
    const GridResolution grid{128, 512};
    for (std::size_t i = 0; i < grid.radial; ++i) {
      for (std::size_t j = 0; j < grid.angular; ++j) {
        const Point2 z = annulus_node(grid, i, j);
        CHECK(leading_term(p, z) >= 1.5 * a * a * (1 - 1e-14));
      }
    }
    CHECK(certify_annulus(p, 64, 256).leading_min_over_alpha2 >= 1.5 - 1e-14);
  }
}

TEST_CASE("grid layout and covering radius") {
  const GridResolution g{64, 256};
  CHECK(annulus_node(g, 0, 0).r2() == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(annulus_node(g, 63, 0).r2() == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(annulus_node(g, 10, 64).theta() == doctest::Approx(std::numbers::pi / 2).epsilon(1e-14));
  const double c1 = covering_radius(g);
  const double c2 = covering_radius({128, 512});
  CHECK(c1 > 0.0);
  CHECK(c2 < 0.55 * c1);
}

TEST_CASE("certify_annulus input checks") {
  CHECK_THROWS_AS(certify_annulus(Params(2.0), 32, 1024), std::invalid_argument);
  CHECK_THROWS_AS(certify_annulus(Params(2.0), 256, 128), std::invalid_argument);
}

TEST_CASE("certification at alpha = 100") {
  const Params p(100.0);
  const CertReport r = certify_annulus(p, 256, 1024);
  CHECK(r.positive);
  CHECK(r.positive == (r.inf_value - r.lipschitz_margin > 0.0));
  CHECK(r.inf_value / 1e4 >= 1.1);
  CHECK(r.inf_value / 1e4 <= 1.6);
  CHECK(Annulus{}.contains(r.argmin, 1e-12));
  CHECK(r.inf_value == doctest::Approx(brute_min(100.0, 256, 1024)).epsilon(1e-12));

  // A grid four times finer never goes below the certified lower bound.
  const double fine = brute_min(100.0, 1024, 4096);
  CHECK(fine <= r.inf_value);
  CHECK(fine >= r.inf_value - r.lipschitz_margin);
}

TEST_CASE("alpha = 10 minimum is positive") {
  const CertReport r = certify_annulus(Params(10.0), 256, 1024);
  CHECK(r.inf_value > 0.0);
  CHECK(r.inf_value == doctest::Approx(brute_min(10.0, 256, 1024)).epsilon(1e-12));
}

TEST_CASE("remainder grows at most linearly in alpha") {
  for (double a : {1.0, 10.0, 100.0}) {
    const Params p(a);
    const CertReport r = certify_annulus(p, 128, 512);
    CHECK(r.remainder_constant > 0.0);
    CHECK(r.remainder_constant < 20.0);
    for (const Point2& z : annulus_sample(2000, 5)) {
      CHECK(std::abs(remainder(p, z)) <= 1.01 * r.remainder_constant * a);
    }
  }
}

TEST_CASE("certification is monotone under grid refinement") {
  for (double a : {1.0, 2.0, 5.0, 20.0, 100.0}) {
    CAPTURE(a);
    const CertReport coarse = certify_annulus(Params(a), 256, 1024);
    const CertReport fine = certify_annulus(Params(a), 512, 2048);
    if (coarse.positive) CHECK(fine.positive);
    CHECK(fine.lipschitz_margin < coarse.lipschitz_margin);
  }
}

TEST_CASE("smallest certified alpha is stable under a four-fold finer grid") {
  const std::vector<double> alphas{1.0, 2.0, 5.0, 10.0, 20.0, 50.0};
  const auto base = smallest_certified(alphas, 512, 2048);
  const auto fine = smallest_certified(alphas, 2048, 8192);
  REQUIRE(base.has_value());
  REQUIRE(fine.has_value());
  CHECK(*base == *fine);
  CHECK(*base == 1.0);
}

TEST_CASE("decay check") {
  const Params p(50.0);
  const CycleGeometry geom(find_limit_cycle(p, 1e-8), p);

  CHECK(decay_check(geom, p, 0.04, 2000) > 0.0);
  CHECK_THROWS_AS(decay_check(geom, p, 0.3, 100), NeighborhoodError);
  CHECK_THROWS_AS(decay_check(geom, p, 0.0, 100), std::invalid_argument);
  CHECK_THROWS_AS(decay_check(geom, p, 0.04, 0), std::invalid_argument);

  SUBCASE("probes stay inside the band") {
    const auto probes = decay_probes(geom, p, 0.04, 500);
    CHECK(probes.size() >= 450);
    double worst = -1e300;
    for (const auto& pr : probes) {
      CHECK(pr.g > 0.0);
      CHECK(pr.g <= 0.04);
      CHECK(std::abs(pr.offset) >= 1e-3 * (1 - 1e-12));
      CHECK(std::abs(pr.offset) <= 0.2 * (1 + 1e-12));
      worst = std::max(worst, pr.ratio);
    }
    CHECK(-worst == decay_check(geom, p, 0.04, 500));
  }

  SUBCASE("small offsets match twice the normal stretching rate") {
    const auto& pts = geom.cycle().samples;
    for (std::size_t j = 0; j < pts.size(); j += 64) {
      const Point2 f = vector_field(p, pts[j]);
      const Point2 nu = (1.0 / norm(f)) * Point2{f.n, -f.m};
      for (double side : {1.0, -1.0}) {
        const Point2 z = pts[j] + 1e-3 * side * nu;
        const auto pr = distance_to_cycle(geom, z);
        const double ratio = dot(vector_field(p, z), 2.0 * (z - pr.proj)) / pr.g;
        const Mat2 jac = jacobian(p, pr.proj);
        const double oracle = 2 * dot(nu, apply(jac, nu));
        CHECK(ratio == doctest::Approx(oracle).epsilon(2e-2).scale(1.0));
      }
    }
  }
}

TEST_CASE("decay rate at alpha = 100 is stable when samples double") {
  const Params p(100.0);
  const CycleGeometry geom(find_limit_cycle(p, 1e-8), p);
  const double c1 = decay_check(geom, p, 0.04, 2000);
  const double c2 = decay_check(geom, p, 0.04, 4000);
  CHECK(c1 > 0.0);
  CHECK(std::abs(c2 - c1) <= 0.2 * c1);
}

TEST_CASE("certify_sweep keeps order and rows") {
  const auto reports = certify_sweep({1.0, 5.0, 100.0}, 256, 1024);
  REQUIRE(reports.size() == 3);
  CHECK(reports[0].alpha == 1.0);
  CHECK(reports[2].alpha == 100.0);
  CHECK(reports[2].positive);
}
