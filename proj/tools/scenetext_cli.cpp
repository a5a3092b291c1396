#include <CLI11.hpp>
#include <fmt/format.h>

#include <csignal>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <string>

#include "scenetext/demo.hpp"
#include "scenetext/pipeline.hpp"
#include "scenetext/service.hpp"

namespace {

scenetext::PreviewService* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Annotated scene-text image synthesis from 3D triangle-mesh scenes"};
  app.require_subcommand(1);

  auto* generate = app.add_subcommand("generate", "Run the batch pipeline from a JSON config");
  std::string config_path;
  std::uint64_t seed = 0;
  scenetext::DebugOutputs debug;
  generate->add_option("--config", config_path, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  auto* seed_opt = generate->add_option("--seed", seed, "Override the master seed");
  generate->add_flag("--dump-gbuffer", debug.gbuffer, "Write per-anchor RGB, normal and quantized depth PNGs");
  generate->add_flag("--dump-regions", debug.regions, "Write boundary maps and proposed regions");
  generate->add_flag("--dump-decals", debug.decals, "Write text meshes (OBJ) and textures");

  auto* serve = app.add_subcommand("serve", "Serve previews, regions and anchor editing over HTTP");
  std::string scene_path;
  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--scene", scene_path, "Scene file (scene.json)")->required()->check(CLI::ExistingFile);
  serve->add_option("--port", port, "TCP port")->check(CLI::Range(0, 65535));
  serve->add_option("--host", host, "Bind address");

  auto* demo = app.add_subcommand("make-demo-scene", "Write the bundled procedural room and street scenes");
  std::string out_dir;
  demo->add_option("--out", out_dir, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) {
      auto config = scenetext::PipelineConfig::load(config_path);
      if (*seed_opt) config.seed = seed;
      const auto manifest = scenetext::run_pipeline(config, debug);
      fmt::print("{} samples, config digest {}\n", manifest.records.size(), manifest.config_digest);
    } else if (*serve) {
      scenetext::Scene scene = scenetext::load_scene(scene_path);
      const auto sidecar = scenetext::anchors_sidecar_path(scene_path);
      scenetext::PreviewService service(std::move(scene), sidecar);
      const int bound = service.bind(host, port);
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      fmt::print("serving on http://{}:{} (anchors: {})\n", host, bound, sidecar.string());
      std::fflush(stdout);
      service.listen();
      g_service = nullptr;
    } else if (*demo) {
      for (const auto& p : scenetext::write_demo_scenes(out_dir)) fmt::print("{}\n", p.string());
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
