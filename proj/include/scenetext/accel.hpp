#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "scenetext/geometry.hpp"

namespace scenetext {

struct SurfacePoint {
  Vec3 point;
  double distance = 0.0;
  Vec3 normal;  // geometric normal of the owning triangle
  std::uint32_t mesh_id = 0;
  std::uint32_t triangle_id = 0;
};

/// Bounding-volume hierarchy over every triangle of a list of meshes. Immutable after
/// construction; queries are const and safe to call concurrently.
class AccelIndex {
public:
  /// Builds over `meshes`, using each mesh's position in the span as its mesh id.
  /// Throws EmptyScene when there are no triangles at all.
  explicit AccelIndex(std::span<const TriMesh> meshes);

  /// Nearest hit with t >= kRayEpsilon, ties broken by (t, mesh id, triangle id).
  std::optional<RayHit> raycast(const Ray3& ray) const;

  /// Closest surface point to `query` if it lies within `max_dist`.
  std::optional<SurfacePoint> closest_point(const Vec3& query, double max_dist) const;

  std::size_t triangle_count() const { return tris_.size(); }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t leaf_count() const;

private:
  struct Tri {
    Vec3 a, b, c;
    std::uint32_t mesh_id;
    std::uint32_t triangle_id;
  };
  struct Node {
    Eigen::AlignedBox3d box;
    std::uint32_t first = 0;  // leaf: first triangle; inner: left child (right = left + 1)
    std::uint32_t count = 0;  // leaf: triangle count; inner: 0
  };

  RayHit make_hit(const Ray3& ray, const Tri& tri, const TriangleHit<double>& h) const;

  std::vector<Tri> tris_;
  std::vector<Node> nodes_;
};

inline AccelIndex build_accel(std::span<const TriMesh> meshes) { return AccelIndex(meshes); }

inline std::optional<RayHit> raycast(const AccelIndex& index, const Ray3& ray) {
  return index.raycast(ray);
}

inline std::optional<SurfacePoint> closest_surface_point(const AccelIndex& index,
                                                         const Vec3& query, double max_dist) {
  return index.closest_point(query, max_dist);
}

}  // namespace scenetext
