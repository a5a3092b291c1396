#include <doctest.h>

#include <fstream>
#include <sstream>

#include "scenetext/camera.hpp"
#include "scenetext/demo.hpp"
#include "scenetext/scene.hpp"
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

void spit(const fs::path& p, const std::string& s) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << s;
}

// Every file under `dir`, keyed by relative path.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return out;
}

}  // namespace

TEST_CASE("point on the optical axis projects to the principal point") {
  const auto k = CameraIntrinsics::with_defaults(720, 1080);
  const CameraPose pose;
  const auto p = project(Vec3(0, 0, 3), k, pose);
  REQUIRE(p);
  CHECK(p->pixel.x() == doctest::Approx(360.0));
  CHECK(p->pixel.y() == doctest::Approx(540.0));
  CHECK(p->depth == doctest::Approx(3.0));
  CHECK_FALSE(project(Vec3(0, 0, -1), k, pose));
}

TEST_CASE("unproject by explicit matrix product") {
  const CameraPose pose;
  CameraIntrinsics unit{1, 1, 0, 0, 1, 1};
  const Vec3 p = unproject(Vec2(0, 0), 1.0, unit, pose);
  CHECK((p - Vec3(0, 0, 1)).norm() < 1e-12);

  CameraIntrinsics k{500, 500, 360, 540, 720, 1080};
  // K^-1 [u v 1]^T * d, written out by hand.
  const auto oracle = [](double u, double v, double d) {
    return Vec3((u - 360.0) / 500.0 * d, (v - 540.0) / 500.0 * d, d);
  };
  CHECK((unproject(Vec2(360, 540), 2.0, k, pose) - Vec3(0, 0, 2)).norm() < 1e-12);
  CHECK((unproject(Vec2(860, 540), 2.0, k, pose) - Vec3(2, 0, 2)).norm() < 1e-12);
  CHECK((unproject(Vec2(123.5, 7.25), 3.5, k, pose) - oracle(123.5, 7.25, 3.5)).norm() < 1e-12);
  CHECK_THROWS_AS(unproject(Vec2(1, 1), 0.0, k, pose), DomainError);
}

TEST_CASE("project inverts unproject under random poses") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  const auto k = CameraIntrinsics::with_defaults(720, 1080);
  for (int i = 0; i < 10000; ++i) {
    const CameraPose pose = CameraPose::from_euler(Vec3(u(rng) * 10 - 5, u(rng) * 3, u(rng) * 10 - 5),
                                                   u(rng) * 360 - 180, u(rng) * 60 - 30, u(rng) * 20 - 10);
    const Vec2 px(u(rng) * 720, u(rng) * 1080);
    const double d = 0.1 + u(rng) * 50;
    const auto back = project(unproject(px, d, k, pose), k, pose);
    REQUIRE(back);
    CHECK((back->pixel - px).norm() < 1e-4);
    CHECK(std::abs(back->depth - d) < 1e-6);
  }
}

TEST_CASE("euler convention") {
  const CameraPose level = CameraPose::from_euler(Vec3::Zero(), 0, 0, 0);
  CHECK((level.forward() - Vec3(0, 0, -1)).norm() < 1e-12);
  CHECK((level.down() - Vec3(0, -1, 0)).norm() < 1e-12);
  CHECK((level.right() - Vec3(1, 0, 0)).norm() < 1e-12);
  const CameraPose left = CameraPose::from_euler(Vec3::Zero(), 90, 0, 0);
  CHECK((left.forward() - Vec3(-1, 0, 0)).norm() < 1e-12);
  const CameraPose up = CameraPose::from_euler(Vec3::Zero(), 0, 30, 0);
  CHECK(up.forward().y() == doctest::Approx(0.5));
}

TEST_CASE("minimal scene file loads") {
  const fs::path dir = testing::scratch_dir("minimal_scene");
  write_obj(dir / "cube.obj", make_box(Vec3(-1, -1, -1), Vec3(1, 1, 1)));
  spit(dir / "scene.json", R"({
    "meshes": [{"path": "cube.obj"}],
    "lights": [{"kind": "directional", "direction": [0, -1, 0]}],
    "anchors": [{"id": "a", "position": [0, 0, 5]}]
  })");
  const Scene s = load_scene(dir / "scene.json");
  CHECK(s.triangle_count() == 12);
  CHECK(s.anchors.size() == 1);
  CHECK(s.id == dir.filename().string());
}

TEST_CASE("missing mesh is reported by name") {
  const fs::path dir = testing::scratch_dir("missing_mesh");
  spit(dir / "scene.json", R"({"meshes": [{"path": "wall.obj"}]})");
  try {
    load_scene(dir / "scene.json");
    FAIL("expected LoadError");
  } catch (const LoadError& e) {
    CHECK(std::string(e.what()) == "mesh not found: wall.obj");
  }
}

TEST_CASE("procedural room re-serializes byte for byte") {
  const fs::path a = testing::scratch_dir("roundtrip_a"), b = testing::scratch_dir("roundtrip_b");
  save_scene(make_room_scene(), a);
  const Scene loaded = load_scene(a / "scene.json");
  save_scene(loaded, b);
  const auto first = snapshot(a), second = snapshot(b);
  CHECK(first.size() == second.size());
  CHECK(first == second);
}

TEST_CASE("anchors sidecar replaces inline anchors and survives a rewrite") {
  const fs::path dir = testing::scratch_dir("sidecar");
  save_scene(make_room_scene(), dir);
  CameraAnchor a;
  a.id = "only";
  a.position = Vec3(0, 1.5, 0);
  a.yaw = 12.5;
  write_anchors_file(anchors_sidecar_path(dir / "scene.json"), {a});
  const Scene s = load_scene(dir / "scene.json");
  REQUIRE(s.anchors.size() == 1);
  CHECK(s.anchors[0].id == "only");
  CHECK(s.anchors[0].yaw == 12.5);
  CHECK_THROWS_AS(validate_anchors({a, a}), ValidationError);
}

TEST_CASE("obj round trip keeps geometry") {
  const fs::path dir = testing::scratch_dir("obj");
  const TriMesh m = make_cylinder(Vec3(1, 0, 2), 0.5, 2.0, 12);
  write_obj(dir / "c.obj", m);
  const TriMesh r = read_obj(dir / "c.obj");
  REQUIRE(r.vertices.size() == m.vertices.size());
  REQUIRE(r.triangles.size() == m.triangles.size());
  for (std::size_t i = 0; i < m.vertices.size(); ++i) CHECK((r.vertices[i] - m.vertices[i]).norm() < 1e-12);
  for (std::size_t i = 0; i < m.triangles.size(); ++i) CHECK(r.triangles[i] == m.triangles[i]);
}
