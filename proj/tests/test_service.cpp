#include <doctest.h>

#include <thread>

// Project headers first: resolv.h, pulled in by httplib, defines a _res macro that Eigen uses as a name.
#include "scenetext/demo.hpp"
#include "scenetext/service.hpp"
#include "support.hpp"

#include <httplib.h>

using namespace scenetext;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Demo room served on an ephemeral port for the lifetime of the object.
struct Running {
  fs::path scene_path;
  std::unique_ptr<PreviewService> service;
  std::thread thread;
  int port = 0;

  explicit Running(const std::string& name) {
    const fs::path dir = testing::scratch_dir(name);
    save_scene(make_room_scene(), dir);
    scene_path = dir / "scene.json";
    service = std::make_unique<PreviewService>(load_scene(scene_path), anchors_sidecar_path(scene_path));
    port = service->bind("127.0.0.1", 0);
    thread = std::thread([this] { service->listen(); });
    service->wait_until_ready();
  }
  ~Running() {
    service->stop();
    thread.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(60, 0);
    return c;
  }
};

}  // namespace

TEST_CASE("query parsing") {
  const auto q = parse_preview_query({{"x", "1.5"}, {"yaw", "-20"}, {"w", "64"}, {"h", "48"}, {"seed", "9"}});
  CHECK(q.pose.position.x() == 1.5);
  CHECK(q.pose.yaw == -20.0);
  CHECK(q.width == 64);
  CHECK(q.height == 48);
  CHECK(q.seed == 9);
  CHECK_THROWS_AS(parse_preview_query({{"x", "abc"}}), ValidationError);
  CHECK_THROWS_AS(parse_preview_query({{"x", "nan"}}), ValidationError);
  CHECK_THROWS_AS(parse_preview_query({{"w", "0"}}), ValidationError);
  CHECK_THROWS_AS(parse_preview_query({{"h", "5000"}}), ValidationError);
  CHECK_THROWS_AS(parse_preview_query({{"preset", "sepia"}}), ValidationError);
}

TEST_CASE("scene info and preview") {
  Running r("service_preview");
  auto c = r.client();
  const auto info = c.Get("/scene/info");
  REQUIRE(info);
  CHECK(info->status == 200);
  const json j = json::parse(info->body);
  CHECK(j.at("id") == "room");
  CHECK(j.at("anchors") == 3);

  const auto png = c.Get("/preview?x=0&y=1.6&z=3&yaw=0&pitch=0&roll=0&w=64&h=48&preset=bright");
  REQUIRE(png);
  CHECK(png->status == 200);
  CHECK(png->get_header_value("Content-Type") == "image/png");
  REQUIRE(png->body.size() > 24);
  CHECK(png->body.substr(1, 3) == "PNG");
  // IHDR width and height, big-endian at bytes 16..23.
  const auto be32 = [&](std::size_t at) {
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v = (v << 8) | static_cast<unsigned char>(png->body[at + k]);
    return v;
  };
  CHECK(be32(16) == 64);
  CHECK(be32(20) == 48);

  const auto bad = c.Get("/preview?x=oops");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  CHECK(json::parse(bad->body).contains("error"));
}

TEST_CASE("regions match an offline proposal at the same seed") {
  Running r("service_regions");
  auto c = r.client();
  const std::string query = "x=0&y=1.6&z=3&yaw=0&pitch=-5&roll=0&w=360&h=540&seed=11";
  const auto res = c.Get("/regions?" + query);
  REQUIRE(res);
  REQUIRE(res->status == 200);
  const json got = json::parse(res->body);
  CHECK(got.is_array());
  CHECK(!got.empty());
  const Scene scene = load_scene(r.scene_path);
  PreviewQuery q;
  q.pose.position = Vec3(0, 1.6, 3);
  q.pose.pitch = -5;
  q.width = 360;
  q.height = 540;
  q.seed = 11;
  CHECK(got == to_json(preview_regions(scene, q)));
  for (const auto& reg : got) {
    CHECK(reg.at("x2").get<int>() - reg.at("x1").get<int>() >= 96);
    CHECK(reg.at("y2").get<int>() - reg.at("y1").get<int>() >= 64);
  }
}

TEST_CASE("anchor create, list, delete") {
  Running r("service_anchors");
  auto c = r.client();
  const auto created = c.Post("/anchors", R"({"id": "desk", "position": [1, 1.5, 2], "yaw": 15, "pitch": -3, "roll": 0, "label": "desk view"})",
                              "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);

  const auto list = c.Get("/anchors");
  REQUIRE(list);
  const json anchors = json::parse(list->body);
  REQUIRE(anchors.is_array());
  CHECK(anchors.size() == 4);
  CHECK(std::any_of(anchors.begin(), anchors.end(), [](const json& a) { return a.at("id") == "desk"; }));

  // Persisted to the sidecar, which the batch loader reads.
  const Scene reloaded = load_scene(r.scene_path);
  REQUIRE(reloaded.anchors.size() == 4);
  CHECK(reloaded.anchors.back().id == "desk");
  CHECK(reloaded.anchors.back().yaw == 15.0);

  const auto dup = c.Post("/anchors", R"({"id": "desk", "position": [0, 0, 0]})", "application/json");
  REQUIRE(dup);
  CHECK(dup->status == 409);

  const auto generated = c.Post("/anchors", R"({"position": [0, 1, 0]})", "application/json");
  REQUIRE(generated);
  CHECK(generated->status == 201);
  CHECK(json::parse(generated->body).at("id") == "anchor-1");

  for (const char* body : {"{not json", R"({"position": [0, 1]})", R"({"position": [0, 1, 0], "yaw": "left"})", "[1, 2]"}) {
    const auto bad = c.Post("/anchors", body, "application/json");
    REQUIRE(bad);
    CHECK_MESSAGE(bad->status == 400, body);
  }

  const auto del = c.Delete("/anchors/desk");
  REQUIRE(del);
  CHECK(del->status == 200);
  const auto missing = c.Delete("/anchors/desk");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  CHECK(r.service->anchors().size() == 4);
  CHECK(read_anchors_file(anchors_sidecar_path(r.scene_path)).size() == 4);
}
