#pragma once

#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "scenetext/accel.hpp"
#include "scenetext/demo.hpp"
#include "scenetext/geometry.hpp"
#include "scenetext/scene.hpp"
#include "scenetext/text.hpp"

namespace scenetext::testing {

inline std::filesystem::path font_dir() { return SCENETEXT_FONT_DIR; }
inline std::filesystem::path data_dir() { return std::filesystem::path(SCENETEXT_SOURCE_DIR) / "data"; }

inline FontLibrary test_fonts() {
  FontLibrary fonts;
  fonts.add_font(font_dir() / "DejaVuSans.ttf");
  return fonts;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("scenetext_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Nearest hit by testing every triangle, with the same tie-break as the index.
inline std::optional<RayHit> brute_force_raycast(const std::vector<TriMesh>& meshes, const Ray3& ray) {
  std::optional<RayHit> best;
  for (std::uint32_t m = 0; m < meshes.size(); ++m) {
    const TriMesh& mesh = meshes[m];
    for (std::uint32_t t = 0; t < mesh.triangles.size(); ++t) {
      const auto& f = mesh.triangles[t];
      const auto h = intersect_ray_triangle(ray, mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]);
      if (!h) continue;
      RayHit hit;
      hit.t = h->t;
      hit.mesh_id = m;
      hit.triangle_id = t;
      hit.point = ray.at(h->t);
      if (!best || hit_precedes(hit, *best)) best = hit;
    }
  }
  return best;
}

/// Single-material scene from meshes, with one directional light along -z and no ambient.
inline Scene scene_of(std::vector<TriMesh> meshes, const std::string& id = "test") {
  Scene s;
  s.id = id;
  s.materials.emplace("default", Material{});
  for (std::size_t i = 0; i < meshes.size(); ++i)
    s.meshes.push_back({"mesh" + std::to_string(i) + ".obj", "default", std::move(meshes[i])});
  Light l;
  l.kind = LightKind::directional;
  l.direction = Vec3(0, 0, -1);
  s.lights.push_back(l);
  s.finalize();
  return s;
}

/// Square wall in the plane z = z0 facing +z, spanning [-half, half] in x and y.
inline TriMesh wall_z(double z0, double half) {
  return make_quad(Vec3(-half, -half, z0), Vec3(half, -half, z0), Vec3(half, half, z0), Vec3(-half, half, z0));
}

}  // namespace scenetext::testing
