#include "scenetext/accel.hpp"

#include <array>
#include <tuple>
#include <limits>
#include <numeric>
#include <string>

namespace scenetext {

namespace {

constexpr std::uint32_t kLeafSize = 4;

// Slab test. Returns the entry parameter, or nullopt when the box lies outside [0, t_max].
std::optional<double> enter_box(const Eigen::AlignedBox3d& box, const Ray3& ray,
                                const Vec3& inv_dir, double t_max) {
  double t0 = 0.0;
  double t1 = t_max;
  for (int axis = 0; axis < 3; ++axis) {
    const double o = ray.origin[axis];
    if (ray.direction[axis] == 0.0) {
      if (o < box.min()[axis] || o > box.max()[axis]) return std::nullopt;
      continue;
    }
    double tn = (box.min()[axis] - o) * inv_dir[axis];
    double tf = (box.max()[axis] - o) * inv_dir[axis];
    if (tn > tf) std::swap(tn, tf);
    t0 = std::max(t0, tn);
    t1 = std::min(t1, tf);
    if (t0 > t1) return std::nullopt;
  }
  return t0;
}

}  // namespace

void TriMesh::validate() const {
  const auto n = static_cast<int>(vertices.size());
  if (!normals.empty() && normals.size() != vertices.size())
    throw ValidationError("mesh normal count does not match vertex count");
  if (!uvs.empty() && uvs.size() != vertices.size())
    throw ValidationError("mesh texture coordinate count does not match vertex count");
  for (const auto& v : vertices)
    if (!v.allFinite()) throw ValidationError("mesh vertex is not finite");
  for (std::size_t i = 0; i < triangles.size(); ++i) {
    const auto& f = triangles[i];
    for (int k = 0; k < 3; ++k)
      if (f[k] < 0 || f[k] >= n)
        throw ValidationError("triangle " + std::to_string(i) + " index out of range");
    if (triangle_area(vertices[f[0]], vertices[f[1]], vertices[f[2]]) <= kDegenerateArea)
      throw ValidationError("triangle " + std::to_string(i) + " is degenerate");
  }
  for (const auto& nrm : normals)
    if (std::abs(nrm.norm() - 1.0) > 1e-6) throw ValidationError("vertex normal is not unit length");
}

AccelIndex::AccelIndex(std::span<const TriMesh> meshes) {
  for (std::size_t m = 0; m < meshes.size(); ++m) {
    const auto& mesh = meshes[m];
    for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
      const auto& f = mesh.triangles[i];
      tris_.push_back({mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]],
                       static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(i)});
    }
  }
  if (tris_.empty()) throw EmptyScene();
  nodes_.reserve(2 * tris_.size() / kLeafSize + 2);
  nodes_.emplace_back();
  std::vector<std::uint32_t> pending{0};
  // Iterative build; each entry carries its triangle range in first/count until split.
  nodes_[0].first = 0;
  nodes_[0].count = static_cast<std::uint32_t>(tris_.size());
  while (!pending.empty()) {
    const std::uint32_t idx = pending.back();
    pending.pop_back();
    const std::uint32_t begin = nodes_[idx].first;
    const std::uint32_t end = begin + nodes_[idx].count;

    Eigen::AlignedBox3d box, centroids;
    for (std::uint32_t i = begin; i < end; ++i) {
      const auto& t = tris_[i];
      box.extend(t.a).extend(t.b).extend(t.c);
      centroids.extend(Vec3((t.a + t.b + t.c) / 3.0));
    }
    const Vec3 pad = Vec3::Constant(1e-9) + 1e-9 * box.sizes().cwiseAbs();
    box.min() -= pad;
    box.max() += pad;
    nodes_[idx].box = box;
    if (end - begin <= kLeafSize) continue;

    int axis = 0;
    centroids.sizes().maxCoeff(&axis);
    const auto key = [axis](const Tri& t) { return t.a[axis] + t.b[axis] + t.c[axis]; };
    std::sort(tris_.begin() + begin, tris_.begin() + end, [&](const Tri& l, const Tri& r) {
      const double kl = key(l), kr = key(r);
      if (kl != kr) return kl < kr;
      if (l.mesh_id != r.mesh_id) return l.mesh_id < r.mesh_id;
      return l.triangle_id < r.triangle_id;
    });
    const std::uint32_t mid = begin + (end - begin) / 2;
    const auto left = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    nodes_.emplace_back();
    nodes_[left].first = begin;
    nodes_[left].count = mid - begin;
    nodes_[left + 1].first = mid;
    nodes_[left + 1].count = end - mid;
    nodes_[idx].first = left;
    nodes_[idx].count = 0;
    pending.push_back(left + 1);
    pending.push_back(left);
  }
}

std::size_t AccelIndex::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.count > 0; }));
}

RayHit AccelIndex::make_hit(const Ray3& ray, const Tri& tri, const TriangleHit<double>& h) const {
  RayHit hit;
  hit.t = h.t;
  hit.point = ray.at(h.t);
  hit.normal = (tri.b - tri.a).cross(tri.c - tri.a).normalized();
  hit.mesh_id = tri.mesh_id;
  hit.triangle_id = tri.triangle_id;
  hit.barycentric = h.barycentric;
  return hit;
}

std::optional<RayHit> AccelIndex::raycast(const Ray3& ray) const {
  const Vec3 inv_dir = ray.direction.cwiseInverse();
  std::optional<RayHit> best;
  double best_t = std::numeric_limits<double>::infinity();

  std::array<std::uint32_t, 128> stack;
  std::size_t top = 0;
  if (!enter_box(nodes_[0].box, ray, inv_dir, best_t)) return std::nullopt;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const Tri& tri = tris_[i];
        const auto h = detail::intersect_unchecked(ray, tri.a, tri.b, tri.c);
        if (!h || h->t > best_t) continue;
        RayHit candidate = make_hit(ray, tri, *h);
        if (!best || hit_precedes(candidate, *best)) {
          best = candidate;
          best_t = candidate.t;
        }
      }
      continue;
    }
    const std::uint32_t l = node.first, r = node.first + 1;
    const auto tl = enter_box(nodes_[l].box, ray, inv_dir, best_t);
    const auto tr = enter_box(nodes_[r].box, ray, inv_dir, best_t);
    // Push the farther child first so the nearer one is popped next.
    if (tl && tr) {
      if (*tl <= *tr) {
        stack[top++] = r;
        stack[top++] = l;
      } else {
        stack[top++] = l;
        stack[top++] = r;
      }
    } else if (tl) {
      stack[top++] = l;
    } else if (tr) {
      stack[top++] = r;
    }
  }
  return best;
}

std::optional<SurfacePoint> AccelIndex::closest_point(const Vec3& query, double max_dist) const {
  std::optional<SurfacePoint> best;
  double best_d2 = max_dist * max_dist;

  std::array<std::uint32_t, 128> stack;
  std::size_t top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (node.box.squaredExteriorDistance(query) > best_d2) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const Tri& tri = tris_[i];
        const Vec3 p = closest_point_on_triangle(query, tri.a, tri.b, tri.c);
        const double d2 = (p - query).squaredNorm();
        if (d2 > best_d2) continue;
        if (best && d2 == best_d2 &&
            std::tie(best->mesh_id, best->triangle_id) < std::tie(tri.mesh_id, tri.triangle_id))
          continue;
        best = SurfacePoint{p, std::sqrt(d2), (tri.b - tri.a).cross(tri.c - tri.a).normalized(),
                            tri.mesh_id, tri.triangle_id};
        best_d2 = d2;
      }
      continue;
    }
    const std::uint32_t l = node.first, r = node.first + 1;
    const double dl = nodes_[l].box.squaredExteriorDistance(query);
    const double dr = nodes_[r].box.squaredExteriorDistance(query);
    if (dl <= dr) {
      stack[top++] = r;
      stack[top++] = l;
    } else {
      stack[top++] = l;
      stack[top++] = r;
    }
  }
  return best;
}

}  // namespace scenetext
