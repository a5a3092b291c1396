#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scenetext/placement.hpp"
#include "scenetext/regions.hpp"
#include "scenetext/sample.hpp"
#include "scenetext/scene.hpp"
#include "scenetext/text.hpp"

namespace scenetext {

inline constexpr const char* kToolVersion = "scenetext 1.0.0";

struct PipelineConfig {
  std::vector<std::filesystem::path> scenes;
  std::filesystem::path corpus;
  std::filesystem::path fonts_dir;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  int samples_per_anchor = 20;
  int regions_min = 2;
  int regions_max = 6;
  std::vector<std::string> presets{"normal", "bright", "dark", "fog"};
  CameraIntrinsics intrinsics = CameraIntrinsics::with_defaults(720, 1080);
  ProposalConfig proposal;
  ViewpointRanges viewpoints;
  AnnotationPolicy annotation;
  GridSize grid;
  int glyph_min = 24;  // nominal glyph height range before shrink-to-fit
  int glyph_max = 96;
  int texture_max = 1024;  // longest texture side in pixels

  /// Parses a JSON config; relative paths resolve against the config file's directory.
  static PipelineConfig load(const std::filesystem::path& path);
  static PipelineConfig from_json(const nlohmann::json& j, const std::filesystem::path& base);
  /// Everything that affects the generated data (output_dir excluded).
  nlohmann::json to_json() const;
  /// Throws ConfigError describing the first problem found.
  void validate() const;
};

struct SampleRecord {
  std::string image;       // relative to the output directory
  std::string annotation;  // relative to the output directory
  std::string scene_id;
  std::string anchor_id;
  Viewpoint pose;
  std::string preset;
  std::uint64_t seed = 0;

  bool operator==(const SampleRecord&) const = default;
};

struct DatasetManifest {
  std::vector<SampleRecord> records;
  std::string config_digest;
  std::string tool_version = kToolVersion;

  nlohmann::json to_json() const;
  static DatasetManifest from_json(const nlohmann::json& j);
};

/// 16 hex digits of FNV-1a over the canonical config JSON and tool version.
std::string config_digest(const PipelineConfig& config);

struct Sample {
  RgbImage image;
  std::vector<WordAnnotation> annotations;
  std::string scene_id;
  std::string anchor_id;
  Viewpoint pose;
  std::string preset;
  std::uint64_t seed = 0;
};

// ICDAR 2015 text format: `x1,y1,x2,y2,x3,y3,x4,y4,transcription`, `###` for ignored words.
std::string icdar_text(const std::vector<WordAnnotation>& annotations);
void export_icdar(const Sample& sample, const std::filesystem::path& path);
/// Parses ICDAR text; ignored lines come back with ignore=true and an empty transcription.
std::vector<WordAnnotation> parse_icdar(std::string_view text);

struct DebugOutputs {
  bool gbuffer = false;
  bool regions = false;
  bool decals = false;
};

/// Everything decided once per anchor: its G-buffer, regions, placed text and sample plan.
struct AnchorPlan {
  std::string scene_id;
  std::string anchor_id;
  GBuffer gbuffer;
  NormalBoundaryMap boundary;
  std::vector<TextRegion2D> regions;
  std::vector<PlacedText> texts;
  std::vector<Viewpoint> viewpoints;
  std::vector<std::string> presets;
  std::vector<std::uint64_t> sample_seeds;
};

/// Seed of an anchor's stream under the master seed.
std::uint64_t anchor_seed(std::uint64_t master, const std::string& scene_id, const std::string& anchor_id);

/// Runs region proposal and text placement for one anchor. nullopt when the anchor yields no
/// region or no text could be placed.
std::optional<AnchorPlan> plan_anchor(const Scene& scene, const CameraAnchor& anchor,
                                      const PipelineConfig& config, const Corpus& corpus,
                                      const FontLibrary& fonts);

/// Renders and annotates sample `index` of a plan. `world` must be make_world(scene, plan.texts).
Sample render_planned_sample(const RenderWorld& world, const AnchorPlan& plan, int index,
                             const PipelineConfig& config);

/// Full batch run: writes images/, annotations/, manifest.json under config.output_dir.
DatasetManifest run_pipeline(const PipelineConfig& config, const DebugOutputs& debug = {});

}  // namespace scenetext
