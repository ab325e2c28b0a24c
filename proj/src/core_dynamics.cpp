#include "mflda/core_dynamics.hpp"

#include <stdexcept>
#include <string>

#include "mflda/errors.hpp"

namespace mflda {

Params::Params(double alpha, double eps) : alpha_(alpha), eps_(eps) {
  if (!(alpha >= 1.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("alpha must be a finite number >= 1, got " +
                                std::to_string(alpha));
  }
  if (!(eps >= 0.0) || !std::isfinite(eps)) {
    throw std::invalid_argument("eps must be a finite number >= 0, got " +
                                std::to_string(eps));
  }
}

double payoff(const Params& params, double x, double y) noexcept {
  const double x2 = x * x;
  const double y2 = y * y;
  return params.alpha() * x * y - x2 / 2.0 + x2 * x2 / 12.0 + y2 / 2.0 -
         y2 * y2 / 12.0;
}

Point2 vector_field(const Params& params, Point2 p) noexcept {
  const double a = params.alpha();
  return {-a * p.n + p.m - p.m * p.m * p.m / 3.0,
          a * p.m + p.n - p.n * p.n * p.n / 3.0};
}

Mat2 jacobian(const Params& params, Point2 p) noexcept {
  const double a = params.alpha();
  return Mat2{{{1.0 - p.m * p.m, -a}, {a, 1.0 - p.n * p.n}}};
}

double divergence(const Params&, Point2 p) noexcept { return 2.0 - p.r2(); }

double angular_velocity(const Params& params, Point2 p) {
  const double r2 = p.r2();
  if (r2 == 0.0) {
    throw DegenerateInputError("angular velocity is undefined at the origin");
  }
  return params.alpha() + r2 / 12.0 * std::sin(4.0 * p.theta());
}

double radial_derivative(const Params&, Point2 p) noexcept {
  const double m2 = p.m * p.m;
  const double n2 = p.n * p.n;
  return 2.0 * (m2 + n2) - 2.0 / 3.0 * (m2 * m2 + n2 * n2);
}

}  // namespace mflda
