#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "scenetext/image.hpp"
#include "scenetext/scene.hpp"

namespace scenetext {

/// Per-view rasters consumed by region proposal and placement.
struct GBuffer {
  int width = 0;
  int height = 0;
  RgbImage rgb;
  Plane<double> depth_f;          // camera-space z; +infinity where nothing was hit
  Plane<std::uint16_t> depth_q;   // quantize_depth(depth_f); 1023 where nothing was hit
  std::vector<Vec3> normal_f;     // row-major; oriented toward the camera; zero where no hit
  RgbImage normal_8;              // encode_normal(normal_f)
  Plane<bool> hit_mask;

  const Vec3& normal(int x, int y) const {
    return normal_f[static_cast<std::size_t>(y) * width + x];
  }
};

inline constexpr int kDepthLevels = 1024;

/// floor(clamp(depth / z_max, 0, 1 - 1e-9) * 1024); +infinity maps to 1023.
/// Throws DomainError for negative or NaN depth and non-positive z_max.
int quantize_depth(double depth_f, double z_max);

/// Depth represented by an integer level: its lower bin edge, the value an integer depth
/// image stores. Level 0 maps to half a bin so that it stays a valid (positive) depth.
double dequantize_depth(int level, double z_max);

/// round((c + 1) / 2 * 255) per component.
std::array<std::uint8_t, 3> encode_normal(const Vec3& n);

/// Text decal: a textured mesh alpha-blended over the surface behind it.
/// `texture` is premultiplied RGBA; texture coordinate (s, r) addresses column s * width and
/// row r * height, so r = 0 is the top edge of the text.
struct DecalLayer {
  TriMesh mesh;
  std::shared_ptr<const RgbaImage> texture;
  std::vector<Eigen::AlignedBox2d> word_boxes;  // texture pixel coordinates
};

/// Scene plus decals under one acceleration index. Mesh ids [0, scene meshes) address scene
/// meshes; the rest address decals in order. Holds a reference to `scene`.
class RenderWorld {
public:
  explicit RenderWorld(const Scene& scene, std::vector<DecalLayer> decals = {});

  const Scene& scene() const { return *scene_; }
  const AccelIndex& accel() const { return accel_ ? *accel_ : scene_->accel(); }
  std::size_t scene_mesh_count() const { return scene_->meshes.size(); }
  bool is_decal(std::uint32_t mesh_id) const { return mesh_id >= scene_mesh_count(); }
  const DecalLayer& decal(std::uint32_t mesh_id) const { return decals_[mesh_id - scene_mesh_count()]; }
  const std::vector<DecalLayer>& decals() const { return decals_; }
  const TriMesh& mesh(std::uint32_t mesh_id) const {
    return is_decal(mesh_id) ? decal(mesh_id).mesh : scene_->meshes[mesh_id].mesh;
  }

private:
  const Scene* scene_;
  std::vector<DecalLayer> decals_;
  std::shared_ptr<const AccelIndex> accel_;  // null when there are no decals
};

/// Texture coordinate at a hit on a mesh with uvs.
Vec2 hit_uv(const TriMesh& mesh, const RayHit& hit);

/// Bilinear fetch of a premultiplied RGBA texture at (s, r) in [0,1]^2; channels in [0,1].
Eigen::Vector4d sample_rgba(const RgbaImage& texture, const Vec2& uv);

/// Shading normal at a hit: vertex normals interpolated when present, else geometric;
/// always oriented against `ray_dir`.
Vec3 shading_normal(const RenderWorld& world, const RayHit& hit, const Vec3& ray_dir);

/// G-buffer from `pose`: one ray per pixel center; ambient + Lambertian shading scaled by
/// the preset multiplier, then exponential fog in camera depth.
GBuffer render_gbuffer(const Scene& scene, const CameraPose& pose,
                       const CameraIntrinsics& intrinsics, const IlluminationPreset& preset);

/// Color image of a world including its decals.
RgbImage render_image(const RenderWorld& world, const CameraPose& pose,
                      const CameraIntrinsics& intrinsics, const IlluminationPreset& preset);

/// Writes rgb.png, normal.png and depth_q.png (16-bit) into `dir` with `prefix`.
void dump_gbuffer(const GBuffer& gbuffer, const std::filesystem::path& dir, const std::string& prefix);

/// Runs fn(y) for every row, spread over hardware threads. Output must only depend on y.
void for_each_row(int height, const std::function<void(int)>& fn);

}  // namespace scenetext
