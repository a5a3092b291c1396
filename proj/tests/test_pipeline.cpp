#include <doctest.h>

#include <fstream>
#include <sstream>

#include "scenetext/demo.hpp"
#include "scenetext/pipeline.hpp"
#include "support.hpp"

using namespace scenetext;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_files(const fs::path& dir, const std::string& ext) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.path().extension() == ext;
  return n;
}

// Demo room reduced to its first anchor through the sidecar file, and a small config over it.
PipelineConfig room_config(const fs::path& root, int samples) {
  const auto scenes = write_demo_scenes(root / "demo");
  const fs::path room = scenes.front();
  const Scene full = load_scene(room);
  write_anchors_file(anchors_sidecar_path(room), {full.anchors.front()});
  const nlohmann::json j = {{"scenes", {room.string()}},
                            {"corpus", (testing::data_dir() / "corpus.txt").string()},
                            {"fonts_dir", testing::font_dir().string()},
                            {"output_dir", (root / "out").string()},
                            {"seed", 7},
                            {"samples_per_anchor", samples},
                            {"intrinsics", {{"width", 240}, {"height", 360}, {"fx", 333.3}, {"fy", 333.3}}}};
  return PipelineConfig::from_json(j, root);
}

}  // namespace

TEST_CASE("one word exports as one ICDAR line") {
  Sample s;
  WordAnnotation a;
  a.quad = {10, 20, 110, 20, 110, 60, 10, 60};
  a.transcription = "HELLO";
  s.annotations = {a};
  const fs::path dir = testing::scratch_dir("icdar");
  export_icdar(s, dir / "gt.txt");
  CHECK(slurp(dir / "gt.txt") == "10,20,110,20,110,60,10,60,HELLO\n");
  s.annotations[0].ignore = true;
  CHECK(icdar_text(s.annotations) == "10,20,110,20,110,60,10,60,###\n");
}

TEST_CASE("ICDAR text parses back to the exported list") {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> coord(0, 1079);
  const std::vector<std::string> words{"alpha", "b,c", "Kiosk-7", "x y", "ignored"};
  std::vector<WordAnnotation> list;
  for (int i = 0; i < 200; ++i) {
    WordAnnotation a;
    for (int& v : a.quad) v = coord(rng);
    a.ignore = i % 5 == 4;
    if (!a.ignore) a.transcription = words[i % 4];
    list.push_back(a);
  }
  const auto parsed = parse_icdar(icdar_text(list));
  REQUIRE(parsed.size() == list.size());
  for (std::size_t i = 0; i < list.size(); ++i) {
    CHECK(parsed[i].quad == list[i].quad);
    CHECK(parsed[i].ignore == list[i].ignore);
    CHECK(parsed[i].transcription == list[i].transcription);
  }
  CHECK_THROWS_AS(parse_icdar("1,2,3\n"), LoadError);
  CHECK_THROWS_AS(parse_icdar("1,2,3,4,5,6,7,x,word\n"), LoadError);
}

TEST_CASE("config defaults and validation") {
  const PipelineConfig c = PipelineConfig::load(testing::data_dir() / "example_config.json");
  CHECK(c.samples_per_anchor == 20);
  CHECK(c.regions_min == 2);
  CHECK(c.regions_max == 6);
  CHECK(c.seed == 7);
  CHECK(c.proposal.threshold == 100);
  CHECK(c.proposal.min_width == 96);
  CHECK(c.proposal.min_height == 64);
  CHECK(c.intrinsics.width == 720);
  CHECK(c.intrinsics.height == 1080);

  PipelineConfig bad = c;
  bad.samples_per_anchor = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(PipelineConfig::from_json({{"scenes", {"x"}}, {"corpus", "c"}, {"fonts_dir", "f"}, {"seed", -3}}, "."),
                  ConfigError);
  const auto big = PipelineConfig::from_json(
      {{"scenes", {"x"}}, {"corpus", "c"}, {"fonts_dir", "f"}, {"seed", "18446744073709551615"}}, ".");
  CHECK(big.seed == 18446744073709551615ULL);
}

TEST_CASE("config digest ignores the output directory") {
  PipelineConfig a = PipelineConfig::load(testing::data_dir() / "example_config.json");
  PipelineConfig b = a;
  b.output_dir = "/elsewhere";
  CHECK(config_digest(a) == config_digest(b));
  CHECK(config_digest(a).size() == 16);
  b.seed = 8;
  CHECK(config_digest(a) != config_digest(b));
}

TEST_CASE("anchor streams are independent of other anchors") {
  CHECK(anchor_seed(7, "room", "room-a") == anchor_seed(7, "room", "room-a"));
  CHECK(anchor_seed(7, "room", "room-a") != anchor_seed(7, "room", "room-b"));
  CHECK(anchor_seed(7, "room", "room-a") != anchor_seed(7, "street", "room-a"));
  CHECK(anchor_seed(7, "room", "room-a") != anchor_seed(8, "room", "room-a"));
}

TEST_CASE("a run writes one image and one annotation per record") {
  const fs::path root = testing::scratch_dir("pipeline_counts");
  const PipelineConfig config = room_config(root, 2);
  const DatasetManifest m = run_pipeline(config);
  CHECK(m.records.size() == 2);
  CHECK(count_files(config.output_dir / "images", ".png") == 2);
  CHECK(count_files(config.output_dir / "annotations", ".txt") == 2);
  for (const auto& r : m.records) {
    CHECK(fs::exists(config.output_dir / r.image));
    CHECK(fs::exists(config.output_dir / r.annotation));
    CHECK(r.scene_id == "room");
    CHECK(r.anchor_id == "room-a");
  }
  const auto reread = DatasetManifest::from_json(nlohmann::json::parse(slurp(config.output_dir / "manifest.json")));
  CHECK(reread.to_json() == m.to_json());
  CHECK(reread.config_digest == config_digest(config));
}

TEST_CASE("the same config and seed reproduce every artifact") {
  const fs::path root = testing::scratch_dir("pipeline_repeat");
  PipelineConfig config = room_config(root, 2);
  run_pipeline(config);
  const std::string manifest = slurp(config.output_dir / "manifest.json");
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(config.output_dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), config.output_dir).string()] = slurp(e.path());
  run_pipeline(config);
  for (const auto& [name, bytes] : files) CHECK_MESSAGE(slurp(config.output_dir / name) == bytes, name);
  CHECK(slurp(config.output_dir / "manifest.json") == manifest);
}

TEST_CASE("planned samples annotate placed words") {
  const fs::path root = testing::scratch_dir("pipeline_plan");
  const PipelineConfig config = room_config(root, 3);
  const Scene scene = load_scene(config.scenes.front());
  const Corpus corpus = Corpus::load(config.corpus);
  const FontLibrary fonts = FontLibrary::load_dir(config.fonts_dir);
  const auto plan = plan_anchor(scene, scene.anchors.front(), config, corpus, fonts);
  REQUIRE(plan);
  CHECK(!plan->texts.empty());
  CHECK(plan->texts.size() <= static_cast<std::size_t>(config.regions_max));
  CHECK(plan->viewpoints.size() == 3);
  const RenderWorld world = make_world(scene, plan->texts);
  int annotated = 0;
  for (int i = 0; i < 3; ++i) annotated += !render_planned_sample(world, *plan, i, config).annotations.empty();
  CHECK(annotated > 0);
}
