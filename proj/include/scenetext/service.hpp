#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "scenetext/regions.hpp"
#include "scenetext/sample.hpp"
#include "scenetext/scene.hpp"

namespace scenetext {

inline constexpr int kMaxPreviewSide = 2048;

struct PreviewQuery {
  Viewpoint pose;
  int width = 320;
  int height = 240;
  std::string preset = "normal";
  std::uint64_t seed = 0;
};

/// Parses x, y, z, yaw, pitch, roll, w, h, preset and seed from query parameters; missing
/// values keep their defaults. Throws ValidationError on malformed or out-of-range values.
PreviewQuery parse_preview_query(const std::multimap<std::string, std::string>& params);

/// Preview camera: same horizontal field of view as the default 720-pixel-wide pipeline camera.
CameraIntrinsics preview_intrinsics(int width, int height);

/// Regions the pipeline would propose from the query's pose, with the query's seed.
std::vector<TextRegion2D> preview_regions(const Scene& scene, const PreviewQuery& query,
                                          const ProposalConfig& proposal = {});

/// HTTP API for interactive anchor editing. Rendering is read-only over the scene; anchor
/// changes are written atomically to `anchors_path`.
class PreviewService {
public:
  PreviewService(Scene scene, std::filesystem::path anchors_path);
  ~PreviewService();
  PreviewService(const PreviewService&) = delete;
  PreviewService& operator=(const PreviewService&) = delete;

  /// Binds to `port` (0 picks a free one) and returns the bound port; throws IoError on failure.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  void listen();
  void stop();
  void wait_until_ready() const;

  std::vector<CameraAnchor> anchors() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace scenetext
