#pragma once

#include <optional>

#include "skelact/vec3.hpp"

namespace skelact {

// Point-level geometric primitives behind the skeleton features. The throwing
// forms raise Error(kDegenerateGeometry) on coincident joints or collinear
// plane points; the try_ forms return nullopt instead and are what feature
// extraction uses, substituting 0.
namespace geometry {

// Segments shorter than this are treated as coincident joints.
inline constexpr double kMinLength = 1e-9;
// Planes whose spanning vectors have |u x v| <= kMinSine * |u| * |v| are
// treated as collinear.
inline constexpr double kMinSine = 1e-9;

std::optional<Vec3> try_unit(const Vec3& v);
std::optional<Vec3> try_plane_normal(const Vec3& a, const Vec3& b, const Vec3& c);

// Clamped arccos of the dot product of two unit vectors.
double angle_between_units(const Vec3& u, const Vec3& v);

std::optional<Vec3> try_joint_orientation(const Vec3& from, const Vec3& to);
std::optional<double> try_joint_line_distance(const Vec3& g, const Vec3& a,
                                              const Vec3& b);
std::optional<double> try_line_line_angle(const Vec3& a1, const Vec3& a2,
                                          const Vec3& b1, const Vec3& b2);
std::optional<double> try_joint_plane_distance(const Vec3& g, const Vec3& p1,
                                               const Vec3& p2, const Vec3& p3);
std::optional<double> try_line_plane_angle(const Vec3& a1, const Vec3& a2,
                                           const Vec3& p1, const Vec3& p2,
                                           const Vec3& p3);
std::optional<double> try_plane_plane_angle(const Vec3& p1, const Vec3& p2,
                                            const Vec3& p3, const Vec3& q1,
                                            const Vec3& q2, const Vec3& q3);

}  // namespace geometry

/// Unit vector pointing from `from` to `to`.
Vec3 joint_orientation(const Vec3& from, const Vec3& to);

/// Perpendicular distance from g to the infinite line through a and b,
/// computed as twice the triangle area over the base length.
double joint_line_distance(const Vec3& g, const Vec3& a, const Vec3& b);

/// Angle in [0, pi] between the directions a1->a2 and b1->b2.
double line_line_angle(const Vec3& a1, const Vec3& a2, const Vec3& b1,
                       const Vec3& b2);

/// Signed distance (g - p1) . n, with n the unit normal of (p2-p1) x (p3-p1).
double joint_plane_distance(const Vec3& g, const Vec3& p1, const Vec3& p2,
                            const Vec3& p3);

/// Angle in [0, pi] between the line direction a1->a2 and the plane normal.
double line_plane_angle(const Vec3& a1, const Vec3& a2, const Vec3& p1,
                        const Vec3& p2, const Vec3& p3);

/// Angle in [0, pi] between two plane normals. Sensitive to vertex order:
/// reversing the winding of one plane maps theta to pi - theta.
double plane_plane_angle(const Vec3& p1, const Vec3& p2, const Vec3& p3,
                         const Vec3& q1, const Vec3& q2, const Vec3& q3);

}  // namespace skelact
