#pragma once

#include <Eigen/Core>

#include <cmath>

namespace radlab {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

template <typename Scalar>
using Mat2 = Eigen::Matrix<Scalar, 2, 2>;

using Vec2d = Vec2<double>;
using Mat2d = Mat2<double>;

/// Reduces a coordinate to the fundamental domain [0,1).
template <typename Scalar>
inline Scalar wrap_unit(Scalar v) {
  Scalar w = v - std::floor(v);
  if (w >= Scalar(1)) w -= Scalar(1);  // rounding can push v - floor(v) to 1
  return w;
}

/// A point on the flat 2-torus [0,1)^2. Both coordinates stay reduced mod 1
/// through every construction and map application.
template <typename Scalar>
struct TorusPoint {
  Scalar x{0};
  Scalar y{0};

  static TorusPoint wrapped(Scalar px, Scalar py) {
    return TorusPoint{wrap_unit(px), wrap_unit(py)};
  }

  Vec2<Scalar> vec() const { return Vec2<Scalar>(x, y); }
};

using TorusPointd = TorusPoint<double>;

/// Shortest displacement vector from `from` to `to`, components in [-1/2, 1/2].
template <typename Scalar>
inline Vec2<Scalar> torus_delta(const TorusPoint<Scalar>& from, const TorusPoint<Scalar>& to) {
  Scalar dx = to.x - from.x;
  Scalar dy = to.y - from.y;
  dx -= std::round(dx);
  dy -= std::round(dy);
  return Vec2<Scalar>(dx, dy);
}

/// Flat metric on the torus: Euclidean length of the shortest displacement.
/// Equals the minimum over the 9 integer translates; never exceeds sqrt(2)/2.
template <typename Scalar>
inline Scalar torus_distance(const TorusPoint<Scalar>& p, const TorusPoint<Scalar>& q) {
  return torus_delta(p, q).norm();
}

template <typename Scalar>
inline TorusPoint<Scalar> translate(const TorusPoint<Scalar>& p, const Vec2<Scalar>& v) {
  return TorusPoint<Scalar>::wrapped(p.x + v(0), p.y + v(1));
}

/// Orients a direction vector canonically (first nonzero component positive)
/// so that lines, which are only defined up to sign, serialize stably.
template <typename Scalar>
inline Vec2<Scalar> canonical_direction(Vec2<Scalar> v) {
  if (v(0) < Scalar(0) || (v(0) == Scalar(0) && v(1) < Scalar(0))) v = -v;
  return v;
}

/// Angle in [0, pi/2] between the lines spanned by a and b.
template <typename Scalar>
inline Scalar line_angle(const Vec2<Scalar>& a, const Vec2<Scalar>& b) {
  const Scalar cross = a(0) * b(1) - a(1) * b(0);
  const Scalar dot = a.dot(b);
  return std::atan2(std::abs(cross), std::abs(dot));
}

}  // namespace radlab
