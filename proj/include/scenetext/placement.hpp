#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "scenetext/accel.hpp"
#include "scenetext/camera.hpp"
#include "scenetext/regions.hpp"
#include "scenetext/render.hpp"
#include "scenetext/text.hpp"

namespace scenetext {

/// Lifted region: corners in top-left, top-right, bottom-right, bottom-left image order.
struct Quad3D {
  std::array<Vec3, 4> corners;
  Vec3 normal = Vec3::UnitZ();  // mean surface normal, facing the camera
};

/// Planar rectangle origin + a*u + b*v, a, b in [0, 1]. `u` is the reading direction and
/// `v` points from the bottom edge of the text to its top, so u x v is the outward normal.
struct Rect3D {
  Vec3 origin = Vec3::Zero();  // bottom-left corner of the text
  Vec3 u = Vec3::UnitX();
  Vec3 v = Vec3::UnitY();

  Vec3 normal() const { return u.cross(v).normalized(); }
  double width() const { return u.norm(); }
  double height() const { return v.norm(); }
  /// Top-left, top-right, bottom-right, bottom-left in text orientation.
  std::array<Vec3, 4> corners() const {
    return {origin + v, origin + u + v, origin + u, origin};
  }
};

inline constexpr double kDecalOffset = 1e-3;     // ε_o
inline constexpr double kSurfaceTolerance = 1e-3;  // ε_s

/// Nearest hit from `camera` through `coarse`; nullopt when nothing is hit within twice
/// the coarse distance. Throws DomainError when the two points coincide.
std::optional<Vec3> refine_point(const Vec3& coarse, const Vec3& camera, const AccelIndex& accel);

/// Unprojects the region's corner pixels at their quantized depth and refines them against
/// the geometry. nullopt if a corner sees no geometry or cannot be refined.
std::optional<Quad3D> lift_region(const TextRegion2D& region, const GBuffer& gbuffer, double z_max,
                                  const CameraIntrinsics& intrinsics, const CameraPose& pose,
                                  const AccelIndex& accel);

inline constexpr double kClipStep = 0.02;
inline constexpr int kMaxClipIterations = 50;

/// Largest up-aligned rectangle inscribed in the quad's projection onto its mean plane,
/// found by clipping sides inward. `fallback_right` gives the reading direction when the
/// surface faces straight up or down. nullopt for degenerate quads.
std::optional<Rect3D> rectify(const Quad3D& quad, const Vec3& up, const Vec3& fallback_right);

struct GridSize {
  int nu = 16;
  int nv = 8;
};

/// One word of a placed text, in world space.
struct PlacedWord {
  std::string text;
  bool replaced = false;
  std::vector<Vec3> boundary;  // closed polyline around the word's texture box
  std::vector<Vec3> samples;   // stratified points on the deformed surface
  std::vector<Vec3> sample_normals;
  std::vector<std::array<Vec3, 4>> chars;  // character cells, TL TR BR BL
};

struct PlacedText {
  TriMesh mesh;                   // deformed grid, offset along the surface normal
  std::vector<Vec3> base_vertices;  // before the offset
  std::vector<Vec3> offsets;        // mesh.vertices = base_vertices + offsets
  GridSize grid;
  Rect3D rect;
  std::shared_ptr<const TextTexture> texture;
  TextRegion2D region;
  std::string anchor_id;
  std::vector<PlacedWord> words;

  /// Grid vertex index of (i, j), i along u in [0, nu], j along v in [0, nv] (j = 0 on top).
  int vertex(int i, int j) const { return j * (grid.nu + 1) + i; }
  DecalLayer decal() const;
};

inline constexpr int kWordSamplesPerSide = 8;  // 8 x 8 = 64 visibility samples
inline constexpr int kBoundaryPointsPerSide = 8;

/// Builds the text mesh over `rect`: corners fixed, other vertices snapped to the nearest
/// surface point within 10% of the diagonal, then lifted 2·ε_o along the surface normal.
/// Texture coordinates follow cumulative arc length along grid rows and columns.
PlacedText deform_text_mesh(const Rect3D& rect, const AccelIndex& accel, GridSize grid,
                            std::shared_ptr<const TextTexture> texture);

/// Maps a texture coordinate (s, r) in [0,1]^2 onto the deformed mesh surface.
std::optional<Vec3> surface_at(const PlacedText& placed, const Vec2& st);

}  // namespace scenetext
