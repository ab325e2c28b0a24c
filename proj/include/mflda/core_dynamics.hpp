#pragma once

// Closed-form evaluation of the quartic double-well descent-ascent game
//
//   f(x, y) = a x y - x^2/2 + x^4/12 + y^2/2 - y^4/12
//
// and of the planar field driving the Dirac (noise-free) mean dynamics,
//
//   F(m, n) = (-a n + m - m^3/3,  a m + n - n^3/3).
//
// Everything here is a pure function of its arguments.

#include <array>
#include <cmath>

namespace mflda {

/// Game coupling `alpha` and entropic temperature `eps`.
class Params {
 public:
  /// Throws std::invalid_argument unless alpha >= 1 and eps >= 0.
  Params(double alpha, double eps = 0.0);

  double alpha() const noexcept { return alpha_; }
  double eps() const noexcept { return eps_; }

  /// Stochastic operations need eps in (0, 1]; eps == 0 is also accepted
  /// and switches the noise off.
  bool stochastic_ok() const noexcept { return eps_ >= 0.0 && eps_ <= 1.0; }

 private:
  double alpha_;
  double eps_;
};

/// A point (m, n) of the plane of means.
struct Point2 {
  double m = 0.0;
  double n = 0.0;

  double r2() const noexcept { return m * m + n * n; }
  double r() const noexcept { return std::sqrt(r2()); }
  /// atan2 branch, range (-pi, pi].
  double theta() const noexcept { return std::atan2(n, m); }

  friend Point2 operator+(Point2 a, Point2 b) noexcept { return {a.m + b.m, a.n + b.n}; }
  friend Point2 operator-(Point2 a, Point2 b) noexcept { return {a.m - b.m, a.n - b.n}; }
  friend Point2 operator*(double s, Point2 a) noexcept { return {s * a.m, s * a.n}; }
  friend Point2 operator*(Point2 a, double s) noexcept { return s * a; }
  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double dot(Point2 a, Point2 b) noexcept { return a.m * b.m + a.n * b.n; }
inline double norm(Point2 a) noexcept { return std::hypot(a.m, a.n); }

/// Counter-clockwise quarter turn (m, n) -> (-n, m).
inline Point2 quarter_turn(Point2 p) noexcept { return {-p.n, p.m}; }

/// Row-major 2x2 matrix.
using Mat2 = std::array<std::array<double, 2>, 2>;

inline Point2 apply(const Mat2& a, Point2 v) noexcept {
  return {a[0][0] * v.m + a[0][1] * v.n, a[1][0] * v.m + a[1][1] * v.n};
}

/// The closed annulus r2_min <= m^2 + n^2 <= r2_max that traps the cycle.
struct Annulus {
  double r2_min = 3.0;
  double r2_max = 6.0;

  bool contains(Point2 p, double slack = 0.0) const noexcept {
    const double r2 = p.r2();
    return r2 >= r2_min - slack && r2 <= r2_max + slack;
  }
};

double payoff(const Params& params, double x, double y) noexcept;

/// (-d_x f, +d_y f) evaluated at (m, n).
Point2 vector_field(const Params& params, Point2 p) noexcept;

/// [[1 - m^2, -alpha], [alpha, 1 - n^2]]
Mat2 jacobian(const Params& params, Point2 p) noexcept;

/// 2 - r^2; independent of alpha.
double divergence(const Params& params, Point2 p) noexcept;

/// d(theta)/dt = alpha + (r^2/12) sin(4 theta). Throws DegenerateInputError
/// at the origin.
double angular_velocity(const Params& params, Point2 p);

/// d(r^2)/dt = 2 r^2 - (2/3)(m^4 + n^4); independent of alpha.
double radial_derivative(const Params& params, Point2 p) noexcept;

}  // namespace mflda
