#include <doctest.h>

#include "scenetext/demo.hpp"
#include "scenetext/render.hpp"
#include "support.hpp"

using namespace scenetext;

namespace {

// Wall at z = 5 facing the identity camera (normal -z), lit by one directional light.
Scene facing_wall(double albedo, const Vec3& light_dir) {
  Scene s;
  s.id = "wall";
  Material m;
  m.albedo = Rgb::Constant(albedo);
  s.materials.emplace("m", m);
  s.meshes.push_back({"wall.obj", "m", make_quad(Vec3(-20, -20, 5), Vec3(-20, 20, 5), Vec3(20, 20, 5), Vec3(20, -20, 5))});
  Light l;
  l.direction = light_dir.normalized();
  s.lights.push_back(l);
  s.finalize();
  return s;
}

}  // namespace

TEST_CASE("depth quantization") {
  CHECK(quantize_depth(0.0, 50.0) == 0);
  CHECK(quantize_depth(50.0, 50.0) == 1023);
  CHECK(quantize_depth(80.0, 50.0) == 1023);
  CHECK(quantize_depth(25.0, 50.0) == 512);
  CHECK(quantize_depth(std::numeric_limits<double>::infinity(), 50.0) == 1023);
  CHECK_THROWS_AS(quantize_depth(-1.0, 50.0), DomainError);
  CHECK_THROWS_AS(quantize_depth(1.0, 0.0), DomainError);
  CHECK(dequantize_depth(512, 50.0) == doctest::Approx(25.0));
  CHECK(dequantize_depth(0, 50.0) == doctest::Approx(50.0 / 2048));
}

TEST_CASE("normal encoding") {
  CHECK(encode_normal(Vec3(0, 0, -1)) == std::array<std::uint8_t, 3>{128, 128, 0});
  CHECK(encode_normal(Vec3(1, 0, 0)) == std::array<std::uint8_t, 3>{255, 128, 128});
}

TEST_CASE("nothing in the frustum") {
  const Scene s = testing::scene_of({testing::wall_z(-5, 3)});
  const GBuffer g = render_gbuffer(s, CameraPose{}, CameraIntrinsics::with_defaults(40, 30), IlluminationPreset::named("normal"));
  CHECK_FALSE(g.hit_mask.any());
  CHECK((g.depth_q == 1023).all());
}

TEST_CASE("triangle facing the camera encodes its normal") {
  TriMesh tri;
  tri.vertices = {Vec3(-1, -1, 4), Vec3(0, 1, 4), Vec3(1, -1, 4)};
  tri.triangles = {{0, 1, 2}};
  REQUIRE(tri.geometric_normal(0).z() == doctest::Approx(-1.0));
  const Scene s = testing::scene_of({tri});
  const auto k = CameraIntrinsics::with_defaults(64, 48);
  const GBuffer g = render_gbuffer(s, CameraPose{}, k, IlluminationPreset::named("normal"));
  int covered = 0;
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x) {
      if (!g.hit_mask(y, x)) continue;
      ++covered;
      CHECK((g.normal(x, y) - Vec3(0, 0, -1)).norm() < 1e-12);
      const std::uint8_t* n = g.normal_8.at(x, y);
      CHECK(n[0] == 128);
      CHECK(n[1] == 128);
      CHECK(n[2] == 0);
    }
  CHECK(covered > 100);
}

TEST_CASE("bright preset doubles the single-light diffuse term") {
  const Vec3 light(0.6, 0.0, 0.8);
  const double albedo = 0.4;
  const Scene s = facing_wall(albedo, light);
  const auto k = CameraIntrinsics::with_defaults(32, 24);
  const GBuffer normal = render_gbuffer(s, CameraPose{}, k, IlluminationPreset::named("normal"));
  const GBuffer bright = render_gbuffer(s, CameraPose{}, k, IlluminationPreset::named("bright"));
  // Lambert with n = (0,0,-1): albedo * max(0, n . -l).
  const double diffuse = albedo * std::max(0.0, Vec3(0, 0, -1).dot(-light.normalized()));
  const auto byte = [](double c) { return static_cast<int>(std::lround(std::clamp(c, 0.0, 1.0) * 255)); };
  for (int y = 0; y < k.height; ++y)
    for (int x = 0; x < k.width; ++x)
      for (int c = 0; c < 3; ++c) {
        CHECK(normal.rgb.at(x, y)[c] == byte(diffuse));
        CHECK(bright.rgb.at(x, y)[c] == byte(2.0 * diffuse));
      }
}

TEST_CASE("dark preset never brightens") {
  const Scene s = make_room_scene();
  const auto k = CameraIntrinsics::with_defaults(72, 108);
  const CameraPose pose = s.anchors.front().pose();
  const GBuffer normal = render_gbuffer(s, pose, k, IlluminationPreset::named("normal"));
  const GBuffer dark = render_gbuffer(s, pose, k, IlluminationPreset::named("dark"));
  for (std::size_t i = 0; i < normal.rgb.data.size(); ++i) CHECK(dark.rgb.data[i] <= normal.rgb.data[i]);
}

TEST_CASE("rendering is deterministic and decal-free worlds match the G-buffer") {
  const Scene s = make_room_scene();
  const auto k = CameraIntrinsics::with_defaults(90, 135);
  const CameraPose pose = s.anchors.front().pose();
  const auto preset = IlluminationPreset::named("fog");
  const GBuffer a = render_gbuffer(s, pose, k, preset);
  const GBuffer b = render_gbuffer(s, pose, k, preset);
  CHECK(a.rgb == b.rgb);
  CHECK(a.normal_8 == b.normal_8);
  CHECK((a.depth_q == b.depth_q).all());
  const RenderWorld world(s);
  CHECK(render_image(world, pose, k, preset) == a.rgb);
}

TEST_CASE("unknown preset") { CHECK_THROWS_AS(IlluminationPreset::named("sepia"), ValidationError); }
