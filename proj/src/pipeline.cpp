#include "scenetext/pipeline.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "scenetext/errors.hpp"

namespace scenetext {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename... Args>
void log_info(fmt::format_string<Args...> f, Args&&... args) {
  fmt::print(stderr, "[scenetext] {}\n", fmt::format(f, std::forward<Args>(args)...));
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write: " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::string file_safe(std::string s) {
  for (char& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  return s;
}

std::uint64_t seed_from(const json& j) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) {
    const auto v = j.get<std::int64_t>();
    if (v < 0) throw ConfigError("seed must be non-negative");
    return static_cast<std::uint64_t>(v);
  }
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("seed is not a 64-bit integer: " + s);
    return v;
  }
  throw ConfigError("seed must be an integer");
}

json viewpoint_json(const Viewpoint& v) {
  return {{"position", {v.position.x(), v.position.y(), v.position.z()}},
          {"yaw", v.yaw},
          {"pitch", v.pitch},
          {"roll", v.roll}};
}

Viewpoint viewpoint_from(const json& j) {
  Viewpoint v;
  const auto& p = j.at("position");
  v.position = Vec3(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
  v.yaw = j.at("yaw").get<double>();
  v.pitch = j.at("pitch").get<double>();
  v.roll = j.at("roll").get<double>();
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------------------
// Config

PipelineConfig PipelineConfig::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

PipelineConfig PipelineConfig::from_json(const json& j, const fs::path& base) {
  PipelineConfig c;
  try {
    for (const auto& s : j.at("scenes")) c.scenes.push_back(resolve(base, s.get<std::string>()));
    c.corpus = resolve(base, j.at("corpus").get<std::string>());
    c.fonts_dir = resolve(base, j.at("fonts_dir").get<std::string>());
    c.output_dir = resolve(base, j.value("output_dir", std::string("out")));
    if (j.contains("seed")) c.seed = seed_from(j.at("seed"));
    c.samples_per_anchor = j.value("samples_per_anchor", c.samples_per_anchor);
    if (j.contains("regions_per_view")) {
      const auto& r = j.at("regions_per_view");
      c.regions_min = r.at(0).get<int>();
      c.regions_max = r.at(1).get<int>();
    }
    if (j.contains("presets")) c.presets = j.at("presets").get<std::vector<std::string>>();
    if (j.contains("intrinsics")) {
      const auto& k = j.at("intrinsics");
      const int w = k.value("width", c.intrinsics.width), h = k.value("height", c.intrinsics.height);
      c.intrinsics = CameraIntrinsics::with_defaults(w, h);
      c.intrinsics.fx = k.value("fx", c.intrinsics.fx);
      c.intrinsics.fy = k.value("fy", c.intrinsics.fy);
      c.intrinsics.cx = k.value("cx", c.intrinsics.cx);
      c.intrinsics.cy = k.value("cy", c.intrinsics.cy);
    }
    if (j.contains("proposal")) {
      const auto& p = j.at("proposal");
      c.proposal.threshold = p.value("threshold", c.proposal.threshold);
      c.proposal.min_width = p.value("min_width", c.proposal.min_width);
      c.proposal.min_height = p.value("min_height", c.proposal.min_height);
      if (p.contains("strides")) c.proposal.strides = p.at("strides").get<std::vector<int>>();
    }
    if (j.contains("viewpoints")) {
      c.viewpoints.radius = j.at("viewpoints").value("radius", c.viewpoints.radius);
      c.viewpoints.angle_deg = j.at("viewpoints").value("angle_deg", c.viewpoints.angle_deg);
    }
    if (j.contains("annotation")) {
      c.annotation.keep_threshold = j.at("annotation").value("keep_threshold", c.annotation.keep_threshold);
      c.annotation.character_quads = j.at("annotation").value("character_quads", c.annotation.character_quads);
    }
    if (j.contains("grid")) {
      c.grid.nu = j.at("grid").value("nu", c.grid.nu);
      c.grid.nv = j.at("grid").value("nv", c.grid.nv);
    }
    if (j.contains("text")) {
      c.glyph_min = j.at("text").value("glyph_min", c.glyph_min);
      c.glyph_max = j.at("text").value("glyph_max", c.glyph_max);
      c.texture_max = j.at("text").value("texture_max", c.texture_max);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  return c;
}

json PipelineConfig::to_json() const {
  json scenes_json = json::array();
  for (const auto& s : scenes) scenes_json.push_back(s.generic_string());
  return {
      {"scenes", scenes_json},
      {"corpus", corpus.generic_string()},
      {"fonts_dir", fonts_dir.generic_string()},
      {"seed", seed},
      {"samples_per_anchor", samples_per_anchor},
      {"regions_per_view", {regions_min, regions_max}},
      {"presets", presets},
      {"intrinsics",
       {{"width", intrinsics.width},
        {"height", intrinsics.height},
        {"fx", intrinsics.fx},
        {"fy", intrinsics.fy},
        {"cx", intrinsics.cx},
        {"cy", intrinsics.cy}}},
      {"proposal",
       {{"threshold", proposal.threshold},
        {"min_width", proposal.min_width},
        {"min_height", proposal.min_height},
        {"strides", proposal.strides}}},
      {"viewpoints", {{"radius", viewpoints.radius}, {"angle_deg", viewpoints.angle_deg}}},
      {"annotation",
       {{"keep_threshold", annotation.keep_threshold}, {"character_quads", annotation.character_quads}}},
      {"grid", {{"nu", grid.nu}, {"nv", grid.nv}}},
      {"text", {{"glyph_min", glyph_min}, {"glyph_max", glyph_max}, {"texture_max", texture_max}}},
  };
}

void PipelineConfig::validate() const {
  if (scenes.empty()) throw ConfigError("config lists no scenes");
  for (const auto& s : scenes)
    if (!fs::exists(s)) throw ConfigError("scene not found: " + s.string());
  if (!fs::exists(corpus)) throw ConfigError("corpus not found: " + corpus.string());
  if (!fs::is_directory(fonts_dir)) throw ConfigError("fonts_dir not found: " + fonts_dir.string());
  if (output_dir.empty()) throw ConfigError("output_dir is empty");
  if (samples_per_anchor < 1) throw ConfigError("samples_per_anchor must be at least 1");
  if (regions_min < 1 || regions_max < regions_min) throw ConfigError("regions_per_view must satisfy 1 <= min <= max");
  if (presets.empty()) throw ConfigError("no illumination presets enabled");
  for (const auto& p : presets) {
    try {
      (void)IlluminationPreset::named(p);
    } catch (const ValidationError& e) {
      throw ConfigError(e.what());
    }
  }
  try {
    intrinsics.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("intrinsics: ") + e.what());
  }
  if (proposal.threshold <= 0 || proposal.min_width <= 0 || proposal.min_height <= 0 || proposal.strides.empty())
    throw ConfigError("invalid proposal settings");
  for (int s : proposal.strides)
    if (s <= 0) throw ConfigError("strides must be positive");
  if (viewpoints.radius < 0 || viewpoints.angle_deg < 0) throw ConfigError("viewpoint ranges must be non-negative");
  if (annotation.keep_threshold < 0 || annotation.keep_threshold > 1)
    throw ConfigError("keep_threshold must lie in [0, 1]");
  if (grid.nu < 2 || grid.nv < 2) throw ConfigError("grid needs nu, nv >= 2");
  if (glyph_min < kMinGlyphHeight || glyph_max < glyph_min)
    throw ConfigError(fmt::format("glyph range must satisfy {} <= min <= max", kMinGlyphHeight));
  if (texture_max < 96) throw ConfigError("texture_max must be at least 96");
}

std::string config_digest(const PipelineConfig& config) {
  const std::string canonical = config.to_json().dump() + "\n" + kToolVersion;
  return fmt::format("{:016x}", hash_string(canonical));
}

// ---------------------------------------------------------------------------------------
// Manifest

json DatasetManifest::to_json() const {
  json recs = json::array();
  for (const auto& r : records)
    recs.push_back({{"image", r.image},
                    {"annotation", r.annotation},
                    {"scene_id", r.scene_id},
                    {"anchor_id", r.anchor_id},
                    {"pose", viewpoint_json(r.pose)},
                    {"preset", r.preset},
                    {"seed", r.seed}});
  return {{"tool_version", tool_version}, {"config_digest", config_digest}, {"records", recs}};
}

DatasetManifest DatasetManifest::from_json(const json& j) {
  DatasetManifest m;
  m.tool_version = j.at("tool_version").get<std::string>();
  m.config_digest = j.at("config_digest").get<std::string>();
  for (const auto& r : j.at("records")) {
    SampleRecord rec;
    rec.image = r.at("image").get<std::string>();
    rec.annotation = r.at("annotation").get<std::string>();
    rec.scene_id = r.at("scene_id").get<std::string>();
    rec.anchor_id = r.at("anchor_id").get<std::string>();
    rec.pose = viewpoint_from(r.at("pose"));
    rec.preset = r.at("preset").get<std::string>();
    rec.seed = r.at("seed").get<std::uint64_t>();
    m.records.push_back(std::move(rec));
  }
  return m;
}

// ---------------------------------------------------------------------------------------
// ICDAR

std::string icdar_text(const std::vector<WordAnnotation>& annotations) {
  std::string out;
  for (const auto& a : annotations) {
    const auto& q = a.quad;
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", q[0], q[1], q[2], q[3], q[4], q[5], q[6], q[7],
                       a.ignore ? std::string("###") : a.transcription);
  }
  return out;
}

void export_icdar(const Sample& sample, const fs::path& path) { write_text(path, icdar_text(sample.annotations)); }

std::vector<WordAnnotation> parse_icdar(std::string_view text) {
  std::vector<WordAnnotation> out;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    WordAnnotation a;
    std::size_t field_start = 0;
    for (int k = 0; k < 8; ++k) {
      const std::size_t comma = line.find(',', field_start);
      if (comma == std::string_view::npos) throw LoadError(fmt::format("ICDAR line {}: expected 9 fields", line_no));
      const auto [ptr, ec] = std::from_chars(line.data() + field_start, line.data() + comma, a.quad[k]);
      if (ec != std::errc() || ptr != line.data() + comma)
        throw LoadError(fmt::format("ICDAR line {}: bad coordinate", line_no));
      field_start = comma + 1;
    }
    const std::string_view transcription = line.substr(field_start);
    if (transcription == "###") {
      a.ignore = true;
    } else {
      a.transcription = std::string(transcription);
    }
    out.push_back(std::move(a));
  }
  return out;
}

// ---------------------------------------------------------------------------------------
// Pipeline

std::uint64_t anchor_seed(std::uint64_t master, const std::string& scene_id, const std::string& anchor_id) {
  return derive_seed(derive_seed(master, hash_string(scene_id)), hash_string(anchor_id));
}

namespace {

enum Stream : std::uint64_t { kRegionStream = 1, kTextStream = 2, kViewStream = 3, kSampleStreamBase = 100 };

constexpr std::array<TextStructure, 3> kStructures{TextStructure::word, TextStructure::lines,
                                                   TextStructure::paragraph};

// Texture resolution matching the region's on-screen pixel density, at least 96 x 64.
std::pair<int, int> texture_size(const Rect3D& rect, const TextRegion2D& region, int texture_max) {
  const double w = rect.width(), h = rect.height();
  double scale = std::sqrt(static_cast<double>(region.area()) / (w * h));
  scale = std::max({scale, 96.0 / w, 64.0 / h});
  scale = std::min(scale, texture_max / std::max(w, h));
  return {std::max(96, static_cast<int>(std::lround(w * scale))), std::max(64, static_cast<int>(std::lround(h * scale)))};
}

}  // namespace

std::optional<AnchorPlan> plan_anchor(const Scene& scene, const CameraAnchor& anchor, const PipelineConfig& config,
                                      const Corpus& corpus, const FontLibrary& fonts) {
  if (fonts.size() == 0) throw ConfigError("no fonts loaded");
  const std::uint64_t seed = anchor_seed(config.seed, scene.id, anchor.id);
  Rng region_rng = make_rng(derive_seed(seed, kRegionStream));
  Rng text_rng = make_rng(derive_seed(seed, kTextStream));
  Rng view_rng = make_rng(derive_seed(seed, kViewStream));

  AnchorPlan plan;
  plan.scene_id = scene.id;
  plan.anchor_id = anchor.id;
  const CameraPose pose = anchor.pose();
  plan.gbuffer = render_gbuffer(scene, pose, config.intrinsics, IlluminationPreset::named("normal"));
  plan.boundary = compute_boundary_map(plan.gbuffer.normal_8, plan.gbuffer.hit_mask, config.proposal.threshold);
  plan.regions = propose_regions(plan.boundary, config.proposal, region_rng);
  if (plan.regions.empty()) return std::nullopt;

  const int wanted = uniform_int(text_rng, config.regions_min, config.regions_max);
  const int count = std::min<int>(wanted, static_cast<int>(plan.regions.size()));
  for (int k = 0; k < count; ++k) {
    const TextRegion2D& region = plan.regions[k];
    const RgbImage crop = crop_image(plan.gbuffer.rgb, region.x1, region.y1, region.x2, region.y2);
    TextStyle style;
    style.color = pick_text_color(crop, text_rng);
    const TextStructure structure = kStructures[uniform_int(text_rng, 0, 2)];
    const TextContent content = sample_text(corpus, structure, text_rng);
    style.font = static_cast<std::size_t>(uniform_int(text_rng, 0, static_cast<int>(fonts.size()) - 1));
    style.glyph_height = uniform_int(text_rng, config.glyph_min, config.glyph_max);

    const auto quad = lift_region(region, plan.gbuffer, scene.z_max, config.intrinsics, pose, scene.accel());
    if (!quad) continue;
    const auto rect = rectify(*quad, Vec3::UnitY(), pose.right());
    if (!rect) continue;
    const auto [tw, th] = texture_size(*rect, region, config.texture_max);
    auto texture = rasterize_text(content, style, fonts, tw, th);
    if (!texture) continue;
    PlacedText placed = deform_text_mesh(*rect, scene.accel(), config.grid,
                                         std::make_shared<const TextTexture>(std::move(*texture)));
    placed.region = region;
    placed.anchor_id = anchor.id;
    plan.texts.push_back(std::move(placed));
  }
  if (plan.texts.empty()) return std::nullopt;

  const RenderWorld world = make_world(scene, plan.texts);
  const auto any_visible = [&](const CameraPose& p) {
    for (const auto& t : plan.texts)
      for (const auto& w : t.words)
        if (compute_visibility(w, p, config.intrinsics, world.accel()) > 0.0) return true;
    return false;
  };
  plan.viewpoints = sample_viewpoints(anchor, config.samples_per_anchor, config.viewpoints, view_rng, any_visible);
  for (int i = 0; i < config.samples_per_anchor; ++i) {
    const std::uint64_t s = derive_seed(seed, kSampleStreamBase + static_cast<std::uint64_t>(i));
    Rng rng = make_rng(s);
    plan.sample_seeds.push_back(s);
    plan.presets.push_back(config.presets[uniform_int(rng, 0, static_cast<int>(config.presets.size()) - 1)]);
  }
  return plan;
}

Sample render_planned_sample(const RenderWorld& world, const AnchorPlan& plan, int index,
                             const PipelineConfig& config) {
  Sample s;
  s.scene_id = plan.scene_id;
  s.anchor_id = plan.anchor_id;
  s.pose = plan.viewpoints.at(index);
  s.preset = plan.presets.at(index);
  s.seed = plan.sample_seeds.at(index);
  const CameraPose pose = s.pose.pose();
  s.image = render_sample(world, pose, config.intrinsics, IlluminationPreset::named(s.preset));
  s.annotations = annotate(plan.texts, pose, config.intrinsics, world.accel(), config.annotation);
  return s;
}

namespace {

void clear_outputs(const fs::path& dir, const std::string& extension) {
  if (!fs::is_directory(dir)) return;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == extension) fs::remove(entry.path());
}

void dump_debug(const AnchorPlan& plan, const fs::path& dir, const DebugOutputs& debug) {
  const std::string prefix = file_safe(plan.scene_id + "_" + plan.anchor_id);
  if (debug.gbuffer) dump_gbuffer(plan.gbuffer, dir, prefix);
  if (debug.regions) {
    Plane<std::uint8_t> b = plan.boundary.bits * std::uint8_t{255};
    write_png_gray8(dir / (prefix + "_boundary.png"), b);
    write_text(dir / (prefix + "_regions.json"), to_json(plan.regions).dump(2) + "\n");
  }
  if (debug.decals)
    for (std::size_t i = 0; i < plan.texts.size(); ++i) {
      write_obj(dir / fmt::format("{}_decal{:02}.obj", prefix, i), plan.texts[i].mesh);
      write_png(dir / fmt::format("{}_decal{:02}.png", prefix, i), plan.texts[i].texture->rgba);
    }
}

}  // namespace

DatasetManifest run_pipeline(const PipelineConfig& config, const DebugOutputs& debug) {
  config.validate();
  const Corpus corpus = Corpus::load(config.corpus);
  const FontLibrary fonts = FontLibrary::load_dir(config.fonts_dir);
  const fs::path images = config.output_dir / "images";
  const fs::path annotations = config.output_dir / "annotations";
  const fs::path debug_dir = config.output_dir / "debug";
  fs::create_directories(images);
  fs::create_directories(annotations);
  clear_outputs(images, ".png");
  clear_outputs(annotations, ".txt");

  DatasetManifest manifest;
  manifest.config_digest = config_digest(config);
  for (const auto& scene_path : config.scenes) {
    const Scene scene = load_scene(scene_path);
    log_info("scene {}: {} triangles, {} anchors", scene.id, scene.triangle_count(), scene.anchors.size());
    for (const auto& anchor : scene.anchors) {
      const auto plan = plan_anchor(scene, anchor, config, corpus, fonts);
      if (!plan) {
        log_info("anchor {}/{}: no suitable text region, skipped", scene.id, anchor.id);
        continue;
      }
      log_info("anchor {}/{}: {} regions, {} texts placed", scene.id, anchor.id, plan->regions.size(),
               plan->texts.size());
      if (debug.gbuffer || debug.regions || debug.decals) dump_debug(*plan, debug_dir, debug);
      const RenderWorld world = make_world(scene, plan->texts);
      const std::string stem = file_safe(scene.id + "_" + anchor.id);
      for (int i = 0; i < config.samples_per_anchor; ++i) {
        const Sample sample = render_planned_sample(world, *plan, i, config);
        SampleRecord rec;
        rec.image = fmt::format("images/{}_{:03}.png", stem, i);
        rec.annotation = fmt::format("annotations/gt_{}_{:03}.txt", stem, i);
        write_png(config.output_dir / rec.image, sample.image);
        export_icdar(sample, config.output_dir / rec.annotation);
        rec.scene_id = sample.scene_id;
        rec.anchor_id = sample.anchor_id;
        rec.pose = sample.pose;
        rec.preset = sample.preset;
        rec.seed = sample.seed;
        manifest.records.push_back(std::move(rec));
      }
    }
  }
  write_text(config.output_dir / "manifest.json", manifest.to_json().dump(2) + "\n");
  log_info("wrote {} samples to {}", manifest.records.size(), config.output_dir.string());
  return manifest;
}

}  // namespace scenetext
