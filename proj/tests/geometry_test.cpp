#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "skelact/error.hpp"
#include "skelact/geometry.hpp"
#include "test_util.hpp"

namespace skelact {
namespace {

constexpr double kPi = std::numbers::pi;
using testing::random_point;

void expect_degenerate(auto&& fn) {
  try {
    fn();
    ADD_FAILURE() << "expected DegenerateGeometry";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateGeometry);
  }
}

TEST(JointOrientation, Examples) {
  EXPECT_EQ(joint_orientation({0, 0, 0}, {2, 0, 0}), (Vec3{1, 0, 0}));
  EXPECT_EQ(joint_orientation({1, 1, 1}, {1, 1, 3}), (Vec3{0, 0, 1}));
  expect_degenerate([] { joint_orientation({0, 0, 0}, {0, 0, 0}); });
}

TEST(JointLineDistance, Examples) {
  EXPECT_DOUBLE_EQ(joint_line_distance({0, 1, 0}, {0, 0, 0}, {1, 0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(joint_line_distance({0.5, 0, 0}, {0, 0, 0}, {1, 0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(joint_line_distance({3, 4, 0}, {0, 0, 0}, {1, 0, 0}), 4.0);
  expect_degenerate([] { joint_line_distance({1, 0, 0}, {2, 2, 2}, {2, 2, 2}); });
}

TEST(LineLineAngle, Examples) {
  EXPECT_DOUBLE_EQ(line_line_angle({0, 0, 0}, {1, 0, 0}, {5, 5, 5}, {7, 5, 5}), 0.0);
  EXPECT_DOUBLE_EQ(line_line_angle({0, 0, 0}, {1, 0, 0}, {0, 0, 0}, {0, 3, 0}), kPi / 2);
  EXPECT_DOUBLE_EQ(line_line_angle({0, 0, 0}, {1, 0, 0}, {0, 0, 0}, {-1, 0, 0}), kPi);
  expect_degenerate([] { line_line_angle({0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {1, 0, 0}); });
}

TEST(JointPlaneDistance, Examples) {
  const Vec3 a{0, 0, 0}, b{1, 0, 0}, c{0, 1, 0};
  EXPECT_DOUBLE_EQ(joint_plane_distance({0, 0, 2}, a, b, c), 2.0);
  EXPECT_DOUBLE_EQ(joint_plane_distance({0.3, 0.7, 0}, a, b, c), 0.0);
  EXPECT_DOUBLE_EQ(joint_plane_distance({5, 7, -3}, a, b, c), -3.0);
  expect_degenerate([] { joint_plane_distance({0, 0, 1}, {0, 0, 0}, {1, 1, 1}, {2, 2, 2}); });
}

TEST(LinePlaneAngle, Examples) {
  const Vec3 a{0, 0, 0}, b{1, 0, 0}, c{0, 1, 0};
  EXPECT_DOUBLE_EQ(line_plane_angle({0, 0, 0}, {0, 0, 1}, a, b, c), 0.0);
  EXPECT_DOUBLE_EQ(line_plane_angle({0, 0, 0}, {1, 1, 0}, a, b, c), kPi / 2);
  EXPECT_DOUBLE_EQ(line_plane_angle({0, 0, 1}, {0, 0, 0}, a, b, c), kPi);
  expect_degenerate([&] { line_plane_angle({0, 0, 0}, {0, 0, 1}, a, a, c); });
}

TEST(PlanePlaneAngle, Examples) {
  const Vec3 a{0, 0, 0}, b{1, 0, 0}, c{0, 1, 0};
  EXPECT_DOUBLE_EQ(plane_plane_angle(a, b, c, a, b, c), 0.0);
  EXPECT_DOUBLE_EQ(plane_plane_angle(a, b, c, a, b, {0, 0, 1}), kPi / 2);
  EXPECT_DOUBLE_EQ(plane_plane_angle(a, b, c, a, c, b), kPi);
  expect_degenerate([&] { plane_plane_angle(a, b, c, a, b, {2, 0, 0}); });
}

TEST(Geometry, TryFormsReturnNullopt) {
  EXPECT_FALSE(geometry::try_joint_orientation({1, 1, 1}, {1, 1, 1}));
  EXPECT_FALSE(geometry::try_plane_normal({0, 0, 0}, {1, 0, 0}, {3, 0, 0}));
  EXPECT_TRUE(geometry::try_joint_line_distance({0, 1, 0}, {0, 0, 0}, {1, 0, 0}));
}

TEST(Geometry, ArccosClampNeverNaN) {
  // Nearly parallel long vectors whose normalized dot can round above 1.
  const double v = line_line_angle({0, 0, 0}, {1e8, 1e-8, 0}, {1, 1, 1}, {1 + 1e8, 1 + 1e-8, 1});
  EXPECT_FALSE(std::isnan(v));
  EXPECT_GE(v, 0.0);
}

TEST(GeometryOracle, RandomInputsAgree) {
  Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 g = random_point(rng), a = random_point(rng), b = random_point(rng);
    const Vec3 c = random_point(rng), d = random_point(rng), e = random_point(rng);
    if (!oracle::good_line(a, b) || !oracle::good_line(c, d) || !oracle::good_plane(a, b, c) ||
        !oracle::good_plane(d, e, g)) {
      --i;
      continue;
    }
    const Vec3 o = joint_orientation(a, b);
    const Vec3 ro = oracle::orientation(a, b);
    EXPECT_NEAR(o.x, ro.x, 1e-9);
    EXPECT_NEAR(o.y, ro.y, 1e-9);
    EXPECT_NEAR(o.z, ro.z, 1e-9);
    EXPECT_NEAR(norm(o), 1.0, 1e-12);
    EXPECT_NEAR(joint_line_distance(g, a, b), oracle::line_distance(g, a, b), 1e-9);
    EXPECT_NEAR(line_line_angle(a, b, c, d), oracle::line_line_angle(a, b, c, d), 1e-9);
    EXPECT_NEAR(joint_plane_distance(g, a, b, c), oracle::plane_distance(g, a, b, c), 1e-9);
    EXPECT_NEAR(line_plane_angle(c, d, a, b, e), oracle::line_plane_angle(c, d, a, b, e), 1e-9);
    EXPECT_NEAR(plane_plane_angle(a, b, c, d, e, g), oracle::plane_plane_angle(a, b, c, d, e, g), 1e-9);
  }
}

TEST(GeometryOracle, RangesHold) {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 a = random_point(rng), b = random_point(rng), c = random_point(rng);
    const Vec3 d = random_point(rng), e = random_point(rng), f = random_point(rng);
    for (auto v : {geometry::try_line_line_angle(a, b, c, d), geometry::try_line_plane_angle(a, b, c, d, e),
                   geometry::try_plane_plane_angle(a, b, c, d, e, f)}) {
      if (!v) continue;
      EXPECT_GE(*v, 0.0);
      EXPECT_LE(*v, kPi);
    }
    if (auto v = geometry::try_joint_line_distance(a, b, c)) EXPECT_GE(*v, 0.0);
  }
}

}  // namespace
}  // namespace skelact
