#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scenetext/accel.hpp"
#include "scenetext/camera.hpp"
#include "scenetext/image.hpp"

namespace scenetext {

struct Material {
  Rgb albedo = Rgb::Constant(0.8);
  std::string texture_path;                   // relative to the scene file; empty if none
  std::shared_ptr<const RgbImage> texture;    // resolved at load time
  double ambient = 1.0;
  double diffuse = 1.0;

  /// Albedo at texture coordinate `uv` (nearest texel, wrapping), or the flat albedo.
  Rgb sample(const Vec2& uv) const;
};

enum class LightKind { directional, point, ambient };

struct Light {
  LightKind kind = LightKind::directional;
  Rgb color = Rgb::Ones();
  double intensity = 1.0;
  Vec3 direction = -Vec3::UnitY();  // direction light travels (directional)
  Vec3 position = Vec3::Zero();     // point lights
};

struct FogSettings {
  double density = 0.0;  // per scene unit
  Rgb color = Rgb(0.7, 0.72, 0.75);
};

struct IlluminationPreset {
  std::string name = "normal";
  double multiplier = 1.0;
  std::optional<FogSettings> fog;

  /// normal, bright, dark or fog with the default parameters.
  static IlluminationPreset named(const std::string& name);
};

struct CameraAnchor {
  std::string id;
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
  std::string label;

  CameraPose pose() const { return CameraPose::from_euler(position, yaw, pitch, roll); }
};

struct SceneMesh {
  std::string path;  // OBJ path as written in the scene file
  std::string material;
  TriMesh mesh;
};

/// Immutable world description. The acceleration index over all meshes is built once
/// by finalize() and shared by copies.
struct Scene {
  std::string id;
  std::vector<SceneMesh> meshes;
  std::map<std::string, Material> materials;
  std::vector<Light> lights;
  FogSettings fog;
  double z_max = 50.0;
  Rgb background = Rgb(0.55, 0.62, 0.72);
  std::vector<CameraAnchor> anchors;

  std::size_t triangle_count() const;
  const Material& material_of(std::size_t mesh_index) const;
  std::vector<TriMesh> trimeshes() const;

  /// Validates invariants and builds the acceleration index.
  void finalize();
  const AccelIndex& accel() const;

private:
  std::shared_ptr<const AccelIndex> accel_;
};

/// Reads a scene JSON file and every OBJ it references. A sibling `anchors.json`, when
/// present, replaces the inline anchor list.
Scene load_scene(const std::filesystem::path& path);

/// Writes `scene.json` plus one OBJ per mesh (at each mesh's relative path) into `dir`.
void save_scene(const Scene& scene, const std::filesystem::path& dir);

nlohmann::json scene_to_json(const Scene& scene);

nlohmann::json anchor_to_json(const CameraAnchor& anchor);
CameraAnchor anchor_from_json(const nlohmann::json& j);
void validate_anchors(const std::vector<CameraAnchor>& anchors);

std::vector<CameraAnchor> read_anchors_file(const std::filesystem::path& path);
/// Atomic replace: writes a temporary file next to `path` and renames it over.
void write_anchors_file(const std::filesystem::path& path, const std::vector<CameraAnchor>& anchors);
std::filesystem::path anchors_sidecar_path(const std::filesystem::path& scene_path);

// Wavefront OBJ (v/vn/vt/f; polygons fan-triangulated).
TriMesh read_obj(const std::filesystem::path& path);
std::string obj_to_string(const TriMesh& mesh);
void write_obj(const std::filesystem::path& path, const TriMesh& mesh);

}  // namespace scenetext
