#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>

namespace pursuit {

template <typename Scalar>
using Point2T = Eigen::Matrix<Scalar, 2, 1>;
using Point2 = Point2T<double>;

template <typename Scalar>
constexpr Scalar deg_to_rad(Scalar deg) {
  return deg * std::numbers::pi_v<Scalar> / Scalar(180);
}

template <typename Scalar>
constexpr Scalar rad_to_deg(Scalar rad) {
  return rad * Scalar(180) / std::numbers::pi_v<Scalar>;
}

/// Wraps an angle into (-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar angle) {
  const Scalar pi = std::numbers::pi_v<Scalar>;
  Scalar wrapped = std::remainder(angle, Scalar(2) * pi);
  if (wrapped <= -pi) wrapped += Scalar(2) * pi;
  return wrapped;
}

/// A (speed, heading) pair held for one stage. Heading is kept in (-pi, pi].
template <typename Scalar>
struct PolarActionT {
  Scalar speed{0};
  Scalar heading{0};

  PolarActionT() = default;
  PolarActionT(Scalar speed_, Scalar heading_)
      : speed(speed_), heading(wrap_angle(heading_)) {}

  Point2T<Scalar> direction() const {
    return {std::cos(heading), std::sin(heading)};
  }
  Point2T<Scalar> velocity() const { return speed * direction(); }

  friend bool operator==(const PolarActionT&, const PolarActionT&) = default;
};
using PolarAction = PolarActionT<double>;

/// Position after holding `action` for `steps` unit time steps.
template <typename Scalar>
Point2T<Scalar> position_after(const Point2T<Scalar>& start,
                               const PolarActionT<Scalar>& action, int steps) {
  const Scalar travel = Scalar(steps) * action.speed;
  return {start.x() + travel * std::cos(action.heading),
          start.y() + travel * std::sin(action.heading)};
}

/// Two stages of `half` steps each.
template <typename Scalar>
Point2T<Scalar> endpoint(const Point2T<Scalar>& start,
                         const PolarActionT<Scalar>& first,
                         const PolarActionT<Scalar>& second, int half) {
  return position_after(position_after(start, first, half), second, half);
}

template <typename Scalar>
Scalar endpoint_distance(const Point2T<Scalar>& a, const Point2T<Scalar>& b) {
  return (a - b).norm();
}

/// Uniform-speed action that moves `from` onto `to` in exactly `steps`.
/// A zero displacement yields the (0, 0) action.
template <typename Scalar>
PolarActionT<Scalar> action_towards(const Point2T<Scalar>& from,
                                    const Point2T<Scalar>& to, int steps) {
  const Point2T<Scalar> delta = to - from;
  const Scalar length = delta.norm();
  if (length == Scalar(0)) return {Scalar(0), Scalar(0)};
  return {length / Scalar(steps), std::atan2(delta.y(), delta.x())};
}

}  // namespace pursuit
