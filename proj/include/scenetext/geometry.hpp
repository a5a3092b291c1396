#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "scenetext/errors.hpp"

namespace scenetext {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

using Vec2 = Vector2<double>;
using Vec3 = Vector3<double>;
using Rgb = Eigen::Vector3d;  // linear-ish color, channels in [0,1]

/// Minimum ray parameter accepted as a hit. Keeps rays cast from a surface off that surface.
inline constexpr double kRayEpsilon = 1e-6;
/// Triangles with area at or below this are rejected.
inline constexpr double kDegenerateArea = 1e-12;

template <typename Scalar>
struct Ray {
  Vector3<Scalar> origin;
  Vector3<Scalar> direction;  // unit length

  Vector3<Scalar> at(Scalar t) const { return origin + t * direction; }

  static Ray through(const Vector3<Scalar>& from, const Vector3<Scalar>& to) {
    return {from, (to - from).normalized()};
  }
};

using Ray3 = Ray<double>;

/// Hit against a single triangle. Barycentric weights are for (a, b, c) in that order.
template <typename Scalar>
struct TriangleHit {
  Scalar t;
  Vector3<Scalar> barycentric;
};

template <typename Scalar>
Scalar triangle_area(const Vector3<Scalar>& a, const Vector3<Scalar>& b, const Vector3<Scalar>& c) {
  return Scalar(0.5) * (b - a).cross(c - a).norm();
}

namespace detail {

// Moller-Trumbore without the degeneracy check; callers guarantee a valid triangle.
template <typename Scalar>
std::optional<TriangleHit<Scalar>> intersect_unchecked(const Ray<Scalar>& ray,
                                                       const Vector3<Scalar>& a,
                                                       const Vector3<Scalar>& b,
                                                       const Vector3<Scalar>& c) {
  const Vector3<Scalar> e1 = b - a;
  const Vector3<Scalar> e2 = c - a;
  const Vector3<Scalar> p = ray.direction.cross(e2);
  const Scalar det = e1.dot(p);
  const Scalar scale = e1.norm() * e2.norm();
  if (std::abs(det) <= Scalar(1e-14) * scale) return std::nullopt;  // parallel to the plane
  const Scalar inv_det = Scalar(1) / det;
  const Vector3<Scalar> s = ray.origin - a;
  const Scalar u = s.dot(p) * inv_det;
  if (u < Scalar(0) || u > Scalar(1)) return std::nullopt;
  const Vector3<Scalar> q = s.cross(e1);
  const Scalar v = ray.direction.dot(q) * inv_det;
  if (v < Scalar(0) || u + v > Scalar(1)) return std::nullopt;
  const Scalar t = e2.dot(q) * inv_det;
  if (t < Scalar(kRayEpsilon)) return std::nullopt;
  return TriangleHit<Scalar>{t, Vector3<Scalar>(Scalar(1) - u - v, u, v)};
}

}  // namespace detail

/// Nearest crossing of `ray` with triangle (a, b, c), edges inclusive, t >= kRayEpsilon.
/// Throws DegenerateGeometry for zero-area triangles.
template <typename Scalar>
std::optional<TriangleHit<Scalar>> intersect_ray_triangle(const Ray<Scalar>& ray,
                                                          const Vector3<Scalar>& a,
                                                          const Vector3<Scalar>& b,
                                                          const Vector3<Scalar>& c) {
  if (triangle_area(a, b, c) <= Scalar(kDegenerateArea))
    throw DegenerateGeometry("degenerate geometry: triangle area below 1e-12");
  return detail::intersect_unchecked(ray, a, b, c);
}

/// Closest point on triangle (a, b, c) to p (Voronoi-region walk).
template <typename Scalar>
Vector3<Scalar> closest_point_on_triangle(const Vector3<Scalar>& p, const Vector3<Scalar>& a,
                                          const Vector3<Scalar>& b, const Vector3<Scalar>& c) {
  const Vector3<Scalar> ab = b - a, ac = c - a, ap = p - a;
  const Scalar d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return a;

  const Vector3<Scalar> bp = p - b;
  const Scalar d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return b;

  const Scalar vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + (d1 / (d1 - d3)) * ab;

  const Vector3<Scalar> cp = p - c;
  const Scalar d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return c;

  const Scalar vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + (d2 / (d2 - d6)) * ac;

  const Scalar va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0)
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);

  const Scalar denom = Scalar(1) / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

/// Indexed triangle mesh. Normals and texture coordinates are optional per-vertex channels:
/// either empty or the same length as `vertices`.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Eigen::Vector3i> triangles;
  std::vector<Vec3> normals;
  std::vector<Vec2> uvs;

  std::size_t triangle_count() const { return triangles.size(); }
  bool has_normals() const { return !normals.empty(); }
  bool has_uvs() const { return !uvs.empty(); }

  Vec3 geometric_normal(std::size_t tri) const {
    const auto& f = triangles[tri];
    return (vertices[f[1]] - vertices[f[0]]).cross(vertices[f[2]] - vertices[f[0]]).normalized();
  }

  /// Throws ValidationError on out-of-range indices, degenerate triangles, channel size
  /// mismatches, or non-unit normals.
  void validate() const;
};

struct RayHit {
  double t = 0.0;
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::Zero();  // geometric, unit, winding-oriented
  std::uint32_t mesh_id = 0;
  std::uint32_t triangle_id = 0;
  Vec3 barycentric = Vec3::Zero();  // weights of the triangle's three vertices
};

/// Strict ordering used to make nearest-hit selection deterministic.
inline bool hit_precedes(const RayHit& lhs, const RayHit& rhs) {
  if (lhs.t != rhs.t) return lhs.t < rhs.t;
  if (lhs.mesh_id != rhs.mesh_id) return lhs.mesh_id < rhs.mesh_id;
  return lhs.triangle_id < rhs.triangle_id;
}

}  // namespace scenetext
