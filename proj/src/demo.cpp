#include "scenetext/demo.hpp"

#include <cmath>
#include <numbers>

namespace scenetext {

TriMesh make_quad(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& p3) {
  TriMesh m;
  m.vertices = {p0, p1, p2, p3};
  const Vec3 n = (p1 - p0).cross(p2 - p0).normalized();
  m.normals.assign(4, n);
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

namespace {

void append(TriMesh& dst, const TriMesh& src) {
  const int base = static_cast<int>(dst.vertices.size());
  dst.vertices.insert(dst.vertices.end(), src.vertices.begin(), src.vertices.end());
  dst.normals.insert(dst.normals.end(), src.normals.begin(), src.normals.end());
  for (const auto& f : src.triangles) dst.triangles.emplace_back(f.array() + base);
}

SceneMesh named(std::string path, std::string material, TriMesh mesh) {
  return {std::move(path), std::move(material), std::move(mesh)};
}

Material flat(double r, double g, double b, double ambient = 1.0, double diffuse = 1.0) {
  Material m;
  m.albedo = Rgb(r, g, b);
  m.ambient = ambient;
  m.diffuse = diffuse;
  return m;
}

Light ambient_light(double intensity) {
  Light l;
  l.kind = LightKind::ambient;
  l.intensity = intensity;
  return l;
}

Light sun(const Vec3& direction, double intensity) {
  Light l;
  l.kind = LightKind::directional;
  l.direction = direction.normalized();
  l.intensity = intensity;
  return l;
}

CameraAnchor anchor(std::string id, const Vec3& position, double yaw, double pitch, std::string label) {
  CameraAnchor a;
  a.id = std::move(id);
  a.position = position;
  a.yaw = yaw;
  a.pitch = pitch;
  a.label = std::move(label);
  return a;
}

}  // namespace

TriMesh make_box(const Vec3& lo, const Vec3& hi) {
  const auto p = [&](int x, int y, int z) {
    return Vec3(x ? hi.x() : lo.x(), y ? hi.y() : lo.y(), z ? hi.z() : lo.z());
  };
  TriMesh m;
  append(m, make_quad(p(0, 0, 1), p(1, 0, 1), p(1, 1, 1), p(0, 1, 1)));  // +z
  append(m, make_quad(p(1, 0, 0), p(0, 0, 0), p(0, 1, 0), p(1, 1, 0)));  // -z
  append(m, make_quad(p(1, 0, 1), p(1, 0, 0), p(1, 1, 0), p(1, 1, 1)));  // +x
  append(m, make_quad(p(0, 0, 0), p(0, 0, 1), p(0, 1, 1), p(0, 1, 0)));  // -x
  append(m, make_quad(p(0, 1, 1), p(1, 1, 1), p(1, 1, 0), p(0, 1, 0)));  // +y
  append(m, make_quad(p(0, 0, 0), p(1, 0, 0), p(1, 0, 1), p(0, 0, 1)));  // -y
  return m;
}

TriMesh make_cylinder(const Vec3& base, double radius, double height, int segments) {
  TriMesh m;
  for (int i = 0; i < segments; ++i) {
    const double a = 2.0 * std::numbers::pi * i / segments;
    const Vec3 n(std::cos(a), 0.0, -std::sin(a));
    m.vertices.push_back(base + radius * n);
    m.vertices.push_back(base + radius * n + Vec3(0, height, 0));
    m.normals.push_back(n);
    m.normals.push_back(n);
  }
  for (int i = 0; i < segments; ++i) {
    const int j = (i + 1) % segments;
    m.triangles.emplace_back(2 * i, 2 * j, 2 * j + 1);
    m.triangles.emplace_back(2 * i, 2 * j + 1, 2 * i + 1);
  }
  const int center = static_cast<int>(m.vertices.size());
  m.vertices.push_back(base + Vec3(0, height, 0));
  m.normals.push_back(Vec3::UnitY());
  for (int i = 0; i < segments; ++i) {
    m.vertices.push_back(m.vertices[2 * i + 1]);
    m.normals.push_back(Vec3::UnitY());
  }
  for (int i = 0; i < segments; ++i)
    m.triangles.emplace_back(center, center + 1 + i, center + 1 + (i + 1) % segments);
  return m;
}

TriMesh make_sphere(const Vec3& c, double radius, int stacks, int slices) {
  TriMesh m;
  for (int s = 0; s <= stacks; ++s) {
    const double phi = std::numbers::pi * s / stacks;
    for (int k = 0; k <= slices; ++k) {
      const double theta = 2.0 * std::numbers::pi * k / slices;
      const Vec3 n(std::sin(phi) * std::cos(theta), std::cos(phi), std::sin(phi) * std::sin(theta));
      m.vertices.push_back(c + radius * n);
      m.normals.push_back(n.normalized());
    }
  }
  const auto idx = [&](int s, int k) { return s * (slices + 1) + k; };
  for (int s = 0; s < stacks; ++s)
    for (int k = 0; k < slices; ++k) {
      if (s > 0) m.triangles.emplace_back(idx(s, k), idx(s, k + 1), idx(s + 1, k));
      if (s + 1 < stacks) m.triangles.emplace_back(idx(s, k + 1), idx(s + 1, k + 1), idx(s + 1, k));
    }
  return m;
}

Scene make_room_scene() {
  Scene s;
  s.id = "room";
  s.materials["wall"] = flat(0.86, 0.82, 0.74);
  s.materials["floor"] = flat(0.52, 0.38, 0.28);
  s.materials["ceiling"] = flat(0.93, 0.93, 0.91);
  s.materials["cabinet"] = flat(0.68, 0.3, 0.24);
  s.materials["frame"] = flat(0.2, 0.25, 0.36);
  s.materials["column"] = flat(0.62, 0.64, 0.67);

  const double x0 = -4, x1 = 4, y0 = 0, y1 = 3, z0 = -4, z1 = 4;
  s.meshes.push_back(named("meshes/floor.obj", "floor",
                           make_quad({x0, y0, z1}, {x1, y0, z1}, {x1, y0, z0}, {x0, y0, z0})));
  s.meshes.push_back(named("meshes/ceiling.obj", "ceiling",
                           make_quad({x0, y1, z0}, {x1, y1, z0}, {x1, y1, z1}, {x0, y1, z1})));
  s.meshes.push_back(named("meshes/wall_back.obj", "wall",
                           make_quad({x0, y0, z0}, {x1, y0, z0}, {x1, y1, z0}, {x0, y1, z0})));
  s.meshes.push_back(named("meshes/wall_front.obj", "wall",
                           make_quad({x1, y0, z1}, {x0, y0, z1}, {x0, y1, z1}, {x1, y1, z1})));
  s.meshes.push_back(named("meshes/wall_left.obj", "wall",
                           make_quad({x0, y0, z1}, {x0, y0, z0}, {x0, y1, z0}, {x0, y1, z1})));
  s.meshes.push_back(named("meshes/wall_right.obj", "wall",
                           make_quad({x1, y0, z0}, {x1, y0, z1}, {x1, y1, z1}, {x1, y1, z0})));
  s.meshes.push_back(named("meshes/cabinet.obj", "cabinet", make_box({1.2, 0.0, -3.6}, {2.8, 1.0, -2.6})));
  s.meshes.push_back(named("meshes/frame.obj", "frame", make_box({-3.5, 1.2, -4.0}, {-2.3, 2.2, -3.95})));
  s.meshes.push_back(named("meshes/column.obj", "column", make_cylinder({-2.6, 0.0, -2.0}, 0.45, 3.0, 48)));

  s.lights.push_back(ambient_light(0.35));
  s.lights.push_back(sun({-0.3, -1.0, -0.45}, 0.55));
  Light lamp;
  lamp.kind = LightKind::point;
  lamp.position = Vec3(0.5, 2.8, 0.5);
  lamp.intensity = 0.3;
  s.lights.push_back(lamp);
  s.z_max = 50.0;
  s.background = Rgb(0.55, 0.62, 0.72);

  s.anchors.push_back(anchor("room-a", {0.0, 1.6, 3.0}, 0.0, -5.0, "back wall"));
  s.anchors.push_back(anchor("room-b", {1.5, 1.5, 2.0}, 25.0, -5.0, "column and frame"));
  s.anchors.push_back(anchor("room-c", {-1.0, 1.4, 1.0}, -60.0, 0.0, "right wall"));
  s.finalize();
  return s;
}

Scene make_street_scene() {
  Scene s;
  s.id = "street";
  s.materials["asphalt"] = flat(0.32, 0.32, 0.34);
  s.materials["brick"] = flat(0.66, 0.42, 0.33);
  s.materials["stucco"] = flat(0.84, 0.8, 0.68);
  s.materials["concrete"] = flat(0.7, 0.7, 0.68);
  s.materials["metal"] = flat(0.45, 0.47, 0.5);
  s.materials["awning"] = flat(0.2, 0.45, 0.35);

  s.meshes.push_back(named("meshes/ground.obj", "asphalt",
                           make_quad({-20, 0, 10}, {20, 0, 10}, {20, 0, -40}, {-20, 0, -40})));
  s.meshes.push_back(named("meshes/building_left.obj", "brick", make_box({-12, 0, -30}, {-4, 8, -5})));
  s.meshes.push_back(named("meshes/building_right.obj", "stucco", make_box({4, 0, -30}, {12, 10, -5})));
  s.meshes.push_back(named("meshes/building_back.obj", "concrete", make_box({-6, 0, -36}, {6, 12, -32})));
  s.meshes.push_back(named("meshes/awning.obj", "awning", make_box({3.2, 2.6, -16}, {4.0, 2.8, -11})));
  s.meshes.push_back(named("meshes/kiosk.obj", "concrete", make_box({-3.5, 0, -20}, {-2.3, 2.2, -18.5})));
  s.meshes.push_back(named("meshes/pole.obj", "metal", make_cylinder({2.5, 0.0, -8.0}, 0.2, 4.0, 32)));

  s.lights.push_back(ambient_light(0.4));
  s.lights.push_back(sun({-0.4, -0.8, -0.45}, 0.7));
  s.fog.density = 0.02;
  s.z_max = 50.0;
  s.background = Rgb(0.62, 0.74, 0.88);

  s.anchors.push_back(anchor("street-a", {0.0, 1.7, 0.0}, 0.0, 5.0, "down the street"));
  s.anchors.push_back(anchor("street-b", {1.0, 1.7, -10.0}, 70.0, 5.0, "left facade"));
  s.finalize();
  return s;
}

std::vector<std::filesystem::path> write_demo_scenes(const std::filesystem::path& out) {
  std::vector<std::filesystem::path> paths;
  for (const Scene& scene : {make_room_scene(), make_street_scene()}) {
    save_scene(scene, out / scene.id);
    paths.push_back(out / scene.id / "scene.json");
  }
  return paths;
}

}  // namespace scenetext
