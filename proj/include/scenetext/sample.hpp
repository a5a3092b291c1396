#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "scenetext/placement.hpp"
#include "scenetext/render.hpp"
#include "scenetext/rng.hpp"

namespace scenetext {

struct ViewpointRanges {
  double radius = 0.5;     // scene units
  double angle_deg = 15.0;  // yaw and pitch
};

struct Viewpoint {
  Vec3 position = Vec3::Zero();
  double yaw = 0.0, pitch = 0.0, roll = 0.0;

  CameraPose pose() const { return CameraPose::from_euler(position, yaw, pitch, roll); }
  static Viewpoint of(const CameraAnchor& anchor) {
    return {anchor.position, anchor.yaw, anchor.pitch, anchor.roll};
  }
};

inline constexpr int kViewpointAttempts = 10;

/// n perturbed copies of the anchor: position uniform in a ball of `ranges.radius`, yaw and
/// pitch uniform within ±angle. A candidate rejected by `accept` is redrawn up to 10 times,
/// after which the anchor pose itself is used.
std::vector<Viewpoint> sample_viewpoints(const CameraAnchor& anchor, int n, const ViewpointRanges& ranges,
                                         Rng& rng,
                                         const std::function<bool(const CameraPose&)>& accept = {});

/// Fraction of the word's surface samples that project inside the image, face the camera
/// and are not hidden by nearer geometry.
double compute_visibility(const PlacedWord& word, const CameraPose& pose,
                          const CameraIntrinsics& intrinsics, const AccelIndex& accel);

struct AnnotationPolicy {
  double keep_threshold = 0.3;
  bool character_quads = false;
};

using IntQuad = std::array<int, 8>;  // x1,y1,...,x4,y4 clockwise from the top-left

struct WordAnnotation {
  IntQuad quad{};
  std::string transcription;
  double visibility = 0.0;
  bool ignore = false;
  std::vector<IntQuad> chars;
  int text_index = -1;  // source PlacedText
  int word_index = -1;  // word within it

  bool operator==(const WordAnnotation&) const = default;
};

/// Minimum-area enclosing rectangle of 2D points (convex hull + edge-aligned calipers).
/// Corners are returned clockwise on screen, starting at the corner nearest the top-left.
std::array<Vec2, 4> min_area_rect(const std::vector<Vec2>& points);

/// Converts a continuous pixel-space quad to integer pixel-index corners that still enclose
/// every pixel center inside it and stay within the image.
IntQuad to_pixel_quad(const std::array<Vec2, 4>& quad, int width, int height);

/// Projects each word's boundary, fits the minimum-area rectangle to its in-image part and measures visibility.
/// Words that are entirely invisible are dropped; partially visible ones below the keep
/// threshold, and words with replaced characters, are flagged ignore.
std::vector<WordAnnotation> annotate(const std::vector<PlacedText>& texts, const CameraPose& pose,
                                     const CameraIntrinsics& intrinsics, const AccelIndex& accel,
                                     const AnnotationPolicy& policy = {});

/// Scene plus every placed text as decals.
RenderWorld make_world(const Scene& scene, const std::vector<PlacedText>& texts);

/// Color render of scene and text together.
inline RgbImage render_sample(const RenderWorld& world, const CameraPose& pose,
                              const CameraIntrinsics& intrinsics, const IlluminationPreset& preset) {
  return render_image(world, pose, intrinsics, preset);
}

/// Per-pixel id of the visible text: decal * 65536 + word + 1 where a word's texels with
/// nonzero alpha are seen, 0 elsewhere.
Plane<std::int32_t> render_word_ids(const RenderWorld& world, const CameraPose& pose,
                                    const CameraIntrinsics& intrinsics);

inline std::int32_t word_id(int text_index, int word_index) { return text_index * 65536 + word_index + 1; }

/// True if the pixel index (x, y) lies inside the integer quad (boundary included).
bool quad_contains(const IntQuad& quad, double x, double y);

}  // namespace scenetext
