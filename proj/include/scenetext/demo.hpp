#pragma once

#include <filesystem>
#include <vector>

#include "scenetext/scene.hpp"

namespace scenetext {

// Mesh builders. Every face gets its own vertices so normals stay flat per face.
TriMesh make_quad(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& p3);
TriMesh make_box(const Vec3& min, const Vec3& max);
/// Upright cylinder with smooth side normals and a flat top cap.
TriMesh make_cylinder(const Vec3& base_center, double radius, double height, int segments);
/// Sphere with smooth normals.
TriMesh make_sphere(const Vec3& center, double radius, int stacks, int slices);

/// Closed room with furniture, a picture frame and a column; three inline anchors.
Scene make_room_scene();
/// Street canyon between building facades with a pole and light fog; two inline anchors.
Scene make_street_scene();

/// Writes <out>/room and <out>/street; returns the scene.json paths.
std::vector<std::filesystem::path> write_demo_scenes(const std::filesystem::path& out);

}  // namespace scenetext
