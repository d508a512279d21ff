#include "skelact/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "skelact/error.hpp"

namespace skelact {
namespace geometry {

std::optional<Vec3> try_unit(const Vec3& v) {
  const double n = norm(v);
  if (!(n > kMinLength)) return std::nullopt;
  return v * (1.0 / n);
}

std::optional<Vec3> try_plane_normal(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 u = b - a;
  const Vec3 v = c - a;
  const Vec3 n = cross(u, v);
  const double len = norm(n);
  if (!(len > kMinSine * norm(u) * norm(v)) || !(len > 0.0)) return std::nullopt;
  return n * (1.0 / len);
}

double angle_between_units(const Vec3& u, const Vec3& v) {
  return std::acos(std::clamp(dot(u, v), -1.0, 1.0));
}

std::optional<Vec3> try_joint_orientation(const Vec3& from, const Vec3& to) {
  return try_unit(to - from);
}

std::optional<double> try_joint_line_distance(const Vec3& g, const Vec3& a,
                                              const Vec3& b) {
  const Vec3 base = b - a;
  const double len = norm(base);
  if (!(len > kMinLength)) return std::nullopt;
  // |(g - a) x (b - a)| is twice the area of triangle (g, a, b).
  return norm(cross(g - a, base)) / len;
}

std::optional<double> try_line_line_angle(const Vec3& a1, const Vec3& a2,
                                          const Vec3& b1, const Vec3& b2) {
  const auto u = try_unit(a2 - a1);
  const auto v = try_unit(b2 - b1);
  if (!u || !v) return std::nullopt;
  return angle_between_units(*u, *v);
}

std::optional<double> try_joint_plane_distance(const Vec3& g, const Vec3& p1,
                                               const Vec3& p2, const Vec3& p3) {
  const auto n = try_plane_normal(p1, p2, p3);
  if (!n) return std::nullopt;
  return dot(g - p1, *n);
}

std::optional<double> try_line_plane_angle(const Vec3& a1, const Vec3& a2,
                                           const Vec3& p1, const Vec3& p2,
                                           const Vec3& p3) {
  const auto u = try_unit(a2 - a1);
  const auto n = try_plane_normal(p1, p2, p3);
  if (!u || !n) return std::nullopt;
  return angle_between_units(*u, *n);
}

std::optional<double> try_plane_plane_angle(const Vec3& p1, const Vec3& p2,
                                            const Vec3& p3, const Vec3& q1,
                                            const Vec3& q2, const Vec3& q3) {
  const auto n1 = try_plane_normal(p1, p2, p3);
  const auto n2 = try_plane_normal(q1, q2, q3);
  if (!n1 || !n2) return std::nullopt;
  return angle_between_units(*n1, *n2);
}

}  // namespace geometry

namespace {

template <typename T>
T require(std::optional<T> v, const char* what) {
  if (!v) throw Error(ErrorCode::kDegenerateGeometry, what);
  return *v;
}

}  // namespace

Vec3 joint_orientation(const Vec3& from, const Vec3& to) {
  return require(geometry::try_joint_orientation(from, to), "coincident joints");
}

double joint_line_distance(const Vec3& g, const Vec3& a, const Vec3& b) {
  return require(geometry::try_joint_line_distance(g, a, b), "degenerate line");
}

double line_line_angle(const Vec3& a1, const Vec3& a2, const Vec3& b1,
                       const Vec3& b2) {
  return require(geometry::try_line_line_angle(a1, a2, b1, b2), "degenerate line");
}

double joint_plane_distance(const Vec3& g, const Vec3& p1, const Vec3& p2,
                            const Vec3& p3) {
  return require(geometry::try_joint_plane_distance(g, p1, p2, p3),
                 "collinear plane points");
}

double line_plane_angle(const Vec3& a1, const Vec3& a2, const Vec3& p1,
                        const Vec3& p2, const Vec3& p3) {
  return require(geometry::try_line_plane_angle(a1, a2, p1, p2, p3),
                 "degenerate line or plane");
}

double plane_plane_angle(const Vec3& p1, const Vec3& p2, const Vec3& p3,
                         const Vec3& q1, const Vec3& q2, const Vec3& q3) {
  return require(geometry::try_plane_plane_angle(p1, p2, p3, q1, q2, q3),
                 "collinear plane points");
}

}  // namespace skelact
