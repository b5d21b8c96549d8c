#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pursuit/geometry.hpp"
#include "pursuit/random.hpp"

using namespace pursuit;

TEST_CASE("position_after: axis-aligned, 60 degrees, zero speed") {
  const Point2 a = position_after(Point2(0, 0), PolarAction(1.0, 0.0), 10);
  CHECK(a.x() == doctest::Approx(10.0));
  CHECK(a.y() == doctest::Approx(0.0));

  const Point2 b = position_after(Point2(10, 50), PolarAction(5.0, std::numbers::pi / 3), 10);
  CHECK(b.x() == doctest::Approx(35.0).epsilon(1e-12));
  CHECK(b.y() == doctest::Approx(93.30127).epsilon(1e-7));

  const Point2 c = position_after(Point2(90, 50), PolarAction(0.0, 2.1), 7);
  CHECK(c == Point2(90, 50));
}

TEST_CASE("endpoint: orthogonal legs") {
  const Point2 e = endpoint(Point2(0, 0), PolarAction(1.0, 0.0), PolarAction(1.0, std::numbers::pi / 2), 10);
  CHECK(e.x() == doctest::Approx(10.0));
  CHECK(e.y() == doctest::Approx(10.0));
}

TEST_CASE("endpoint: collinear stages collapse into one leg") {
  Rng rng(11);
  std::uniform_real_distribution<double> u(-100.0, 100.0), speed(0.0, 10.0), angle(-4.0, 4.0);
  for (int i = 0; i < 1000; ++i) {
    const Point2 start(u(rng), u(rng));
    const PolarAction a(speed(rng), angle(rng));
    const Point2 two = endpoint(start, a, a, 10);
    const Point2 one = position_after(start, a, 20);
    CHECK((two - one).norm() < 1e-9);
  }
}

TEST_CASE("endpoint: matches direct coordinate transcription") {
  // x_T = x_0 + h (v1 cos t1 + v2 cos t2), likewise for y, in long double.
  Rng rng(12);
  std::uniform_real_distribution<double> u(-100.0, 100.0), speed(0.0, 10.0), angle(-4.0, 4.0);
  for (int i = 0; i < 1000; ++i) {
    const double x0 = u(rng), y0 = u(rng), v1 = speed(rng), t1 = angle(rng), v2 = speed(rng), t2 = angle(rng);
    const int half = 1 + i % 15;
    const long double x = x0 + half * (v1 * std::cos(static_cast<long double>(t1)) +
                                       v2 * std::cos(static_cast<long double>(t2)));
    const long double y = y0 + half * (v1 * std::sin(static_cast<long double>(t1)) +
                                       v2 * std::sin(static_cast<long double>(t2)));
    const Point2 e = endpoint(Point2(x0, y0), PolarAction(v1, t1), PolarAction(v2, t2), half);
    CHECK(std::abs(e.x() - static_cast<double>(x)) < 1e-9);
    CHECK(std::abs(e.y() - static_cast<double>(y)) < 1e-9);
  }
}

TEST_CASE("endpoint_distance: 3-4-5, zero, symmetric") {
  CHECK(endpoint_distance(Point2(0, 0), Point2(3, 4)) == doctest::Approx(5.0));
  CHECK(endpoint_distance(Point2(1.5, -2), Point2(1.5, -2)) == 0.0);
  Rng rng(13);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 200; ++i) {
    const Point2 a(u(rng), u(rng)), b(u(rng), u(rng));
    CHECK(endpoint_distance(a, b) == endpoint_distance(b, a));
  }
}

TEST_CASE("action_towards reaches the target and degenerates to rest") {
  const auto a = action_towards(Point2(1, 1), Point2(4, 5), 5);
  CHECK(a.speed == doctest::Approx(1.0));
  CHECK((position_after(Point2(1, 1), a, 5) - Point2(4, 5)).norm() < 1e-12);
  const auto z = action_towards(Point2(2, 3), Point2(2, 3), 10);
  CHECK(z.speed == 0.0);
  CHECK(z.heading == 0.0);
}

TEST_CASE("wrap_angle stays in (-pi, pi]") {
  CHECK(wrap_angle(3 * std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_angle(-std::numbers::pi / 2 + 4 * std::numbers::pi) == doctest::Approx(-std::numbers::pi / 2));
  CHECK(rad_to_deg(deg_to_rad(37.5)) == doctest::Approx(37.5));
}
