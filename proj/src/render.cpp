#include "scenetext/render.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace scenetext {

namespace {

constexpr int kMaxDecalLayers = 4;

struct Shaded {
  Rgb color = Rgb::Zero();
  std::optional<RayHit> first;
};

Rgb lighting(const Scene& scene, const Material& mat, const Vec3& point, const Vec3& n) {
  Rgb ambient = Rgb::Zero(), diffuse = Rgb::Zero();
  for (const auto& light : scene.lights) {
    const Rgb radiance = light.color * light.intensity;
    switch (light.kind) {
      case LightKind::ambient:
        ambient += radiance;
        break;
      case LightKind::directional:
        diffuse += radiance * std::max(0.0, n.dot(-light.direction));
        break;
      case LightKind::point:
        diffuse += radiance * std::max(0.0, n.dot((light.position - point).normalized()));
        break;
    }
  }
  return mat.ambient * ambient + mat.diffuse * diffuse;
}

Rgb shade_surface(const RenderWorld& world, const RayHit& hit, const Vec3& dir, double multiplier) {
  const Scene& scene = world.scene();
  const Material& mat = scene.material_of(hit.mesh_id);
  const TriMesh& mesh = world.mesh(hit.mesh_id);
  const Rgb albedo = mesh.has_uvs() ? mat.sample(hit_uv(mesh, hit)) : mat.albedo;
  const Vec3 n = shading_normal(world, hit, dir);
  return (albedo.cwiseProduct(lighting(scene, mat, hit.point, n)) * multiplier).cwiseMin(1.0).cwiseMax(0.0);
}

// Color along `ray`, compositing decals front to back over the first opaque surface.
Shaded trace(const RenderWorld& world, const Ray3& ray, double multiplier) {
  Shaded out;
  Ray3 r = ray;
  Rgb accum = Rgb::Zero();
  double transmit = 1.0;
  for (int layer = 0; layer <= kMaxDecalLayers; ++layer) {
    const auto hit = world.accel().raycast(r);
    if (!out.first) out.first = hit;
    if (!hit) {
      accum += transmit * world.scene().background;
      break;
    }
    if (!world.is_decal(hit->mesh_id) || layer == kMaxDecalLayers) {
      if (world.is_decal(hit->mesh_id)) {
        accum += transmit * world.scene().background;
      } else {
        accum += transmit * shade_surface(world, *hit, r.direction, multiplier);
      }
      break;
    }
    const DecalLayer& decal = world.decal(hit->mesh_id);
    const Eigen::Vector4d texel = sample_rgba(*decal.texture, hit_uv(decal.mesh, *hit));
    // Lit like the surface it is printed on.
    Ray3 behind{hit->point, r.direction};
    const auto under = world.accel().raycast(behind);
    Material mat;
    if (under && !world.is_decal(under->mesh_id)) mat = world.scene().material_of(under->mesh_id);
    const Vec3 n = shading_normal(world, *hit, r.direction);
    const Rgb lit = (texel.head<3>().cwiseProduct(lighting(world.scene(), mat, hit->point, n)) * multiplier)
                        .cwiseMin(1.0);
    accum += transmit * lit;
    transmit *= 1.0 - texel[3];
    r = behind;
    if (transmit <= 0.0) break;
  }
  out.color = accum.cwiseMin(1.0).cwiseMax(0.0);
  return out;
}

Rgb apply_fog(const Rgb& color, const FogSettings& fog, double depth) {
  if (fog.density <= 0.0) return color;
  const double f = std::isfinite(depth) ? std::exp(-fog.density * depth) : 0.0;
  return f * color + (1.0 - f) * fog.color;
}

std::uint8_t to_byte(double c) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0));
}

const FogSettings& effective_fog(const Scene& scene, const IlluminationPreset& preset) {
  return preset.fog ? *preset.fog : scene.fog;
}

double camera_depth(const CameraPose& pose, const Vec3& point) { return pose.to_camera(point).z(); }

}  // namespace

Vec2 hit_uv(const TriMesh& mesh, const RayHit& hit) {
  const auto& f = mesh.triangles[hit.triangle_id];
  return hit.barycentric[0] * mesh.uvs[f[0]] + hit.barycentric[1] * mesh.uvs[f[1]] +
         hit.barycentric[2] * mesh.uvs[f[2]];
}

Eigen::Vector4d sample_rgba(const RgbaImage& tex, const Vec2& uv) {
  const double fx = std::clamp(uv.x(), 0.0, 1.0) * tex.width - 0.5;
  const double fy = std::clamp(uv.y(), 0.0, 1.0) * tex.height - 0.5;
  const int x0 = static_cast<int>(std::floor(fx)), y0 = static_cast<int>(std::floor(fy));
  const double ax = fx - x0, ay = fy - y0;
  Eigen::Vector4d acc = Eigen::Vector4d::Zero();
  for (int dy = 0; dy < 2; ++dy)
    for (int dx = 0; dx < 2; ++dx) {
      const int x = std::clamp(x0 + dx, 0, tex.width - 1);
      const int y = std::clamp(y0 + dy, 0, tex.height - 1);
      const double w = (dx ? ax : 1 - ax) * (dy ? ay : 1 - ay);
      const std::uint8_t* p = tex.at(x, y);
      acc += w * Eigen::Vector4d(p[0], p[1], p[2], p[3]);
    }
  return acc / 255.0;
}

int quantize_depth(double depth_f, double z_max) {
  if (!(z_max > 0.0)) throw DomainError("z_max must be positive");
  if (std::isnan(depth_f) || depth_f < 0.0) throw DomainError("negative depth");
  if (std::isinf(depth_f)) return kDepthLevels - 1;
  const double r = std::clamp(depth_f / z_max, 0.0, 1.0 - 1e-9);
  return static_cast<int>(std::floor(r * kDepthLevels));
}

double dequantize_depth(int level, double z_max) {
  if (level <= 0) return 0.5 * z_max / kDepthLevels;
  return level * z_max / kDepthLevels;
}

std::array<std::uint8_t, 3> encode_normal(const Vec3& n) {
  std::array<std::uint8_t, 3> out{};
  for (int k = 0; k < 3; ++k)
    out[k] = static_cast<std::uint8_t>(std::lround(std::clamp((n[k] + 1.0) / 2.0, 0.0, 1.0) * 255.0));
  return out;
}

RenderWorld::RenderWorld(const Scene& scene, std::vector<DecalLayer> decals)
    : scene_(&scene), decals_(std::move(decals)) {
  if (decals_.empty()) {
    (void)scene.accel();  // must be finalized
    return;
  }
  std::vector<TriMesh> all = scene.trimeshes();
  for (const auto& d : decals_) {
    if (!d.texture || !d.mesh.has_uvs()) throw ValidationError("decal needs a texture and uvs");
    all.push_back(d.mesh);
  }
  accel_ = std::make_shared<const AccelIndex>(all);
}

Vec3 shading_normal(const RenderWorld& world, const RayHit& hit, const Vec3& ray_dir) {
  const Vec3 geometric = hit.normal.dot(ray_dir) > 0.0 ? Vec3(-hit.normal) : hit.normal;
  const TriMesh& mesh = world.mesh(hit.mesh_id);
  if (!mesh.has_normals()) return geometric;
  const auto& f = mesh.triangles[hit.triangle_id];
  Vec3 n = hit.barycentric[0] * mesh.normals[f[0]] + hit.barycentric[1] * mesh.normals[f[1]] +
           hit.barycentric[2] * mesh.normals[f[2]];
  const double len = n.norm();
  if (len < 1e-12) return geometric;
  n /= len;
  return n.dot(geometric) < 0.0 ? Vec3(-n) : n;
}

void for_each_row(int height, const std::function<void(int)>& fn) {
  const unsigned threads = std::max(1u, std::min(std::thread::hardware_concurrency(), 16u));
  if (threads == 1 || height < 2) {
    for (int y = 0; y < height; ++y) fn(y);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int y = next++; y < height; y = next++) fn(y);
    });
  for (auto& th : pool) th.join();
}

GBuffer render_gbuffer(const Scene& scene, const CameraPose& pose,
                       const CameraIntrinsics& intrinsics, const IlluminationPreset& preset) {
  if (intrinsics.width <= 0 || intrinsics.height <= 0) throw DomainError("zero-area image");
  intrinsics.validate();
  const int w = intrinsics.width, h = intrinsics.height;
  GBuffer g;
  g.width = w;
  g.height = h;
  g.rgb = RgbImage(w, h);
  g.depth_f = Plane<double>::Constant(h, w, std::numeric_limits<double>::infinity());
  g.depth_q = Plane<std::uint16_t>::Constant(h, w, kDepthLevels - 1);
  g.normal_f.assign(static_cast<std::size_t>(w) * h, Vec3::Zero());
  g.normal_8 = RgbImage(w, h, 128);
  g.hit_mask = Plane<bool>::Constant(h, w, false);

  const RenderWorld world(scene);
  const FogSettings& fog = effective_fog(scene, preset);
  for_each_row(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const Ray3 ray = pixel_ray(Vec2(x + 0.5, y + 0.5), intrinsics, pose);
      const Shaded s = trace(world, ray, preset.multiplier);
      double depth = std::numeric_limits<double>::infinity();
      if (s.first) {
        depth = camera_depth(pose, s.first->point);
        const Vec3 n = shading_normal(world, *s.first, ray.direction);
        g.depth_f(y, x) = depth;
        g.depth_q(y, x) = static_cast<std::uint16_t>(quantize_depth(depth, scene.z_max));
        g.normal_f[static_cast<std::size_t>(y) * w + x] = n;
        const auto enc = encode_normal(n);
        std::copy(enc.begin(), enc.end(), g.normal_8.at(x, y));
        g.hit_mask(y, x) = true;
      }
      const Rgb c = apply_fog(s.color, fog, depth);
      std::uint8_t* px = g.rgb.at(x, y);
      for (int k = 0; k < 3; ++k) px[k] = to_byte(c[k]);
    }
  });
  return g;
}

RgbImage render_image(const RenderWorld& world, const CameraPose& pose,
                      const CameraIntrinsics& intrinsics, const IlluminationPreset& preset) {
  if (intrinsics.width <= 0 || intrinsics.height <= 0) throw DomainError("zero-area image");
  intrinsics.validate();
  RgbImage image(intrinsics.width, intrinsics.height);
  const FogSettings& fog = effective_fog(world.scene(), preset);
  for_each_row(intrinsics.height, [&](int y) {
    for (int x = 0; x < intrinsics.width; ++x) {
      const Ray3 ray = pixel_ray(Vec2(x + 0.5, y + 0.5), intrinsics, pose);
      const Shaded s = trace(world, ray, preset.multiplier);
      const double depth = s.first ? camera_depth(pose, s.first->point)
                                   : std::numeric_limits<double>::infinity();
      const Rgb c = apply_fog(s.color, fog, depth);
      std::uint8_t* px = image.at(x, y);
      for (int k = 0; k < 3; ++k) px[k] = to_byte(c[k]);
    }
  });
  return image;
}

void dump_gbuffer(const GBuffer& g, const std::filesystem::path& dir, const std::string& prefix) {
  std::filesystem::create_directories(dir);
  write_png(dir / (prefix + "_rgb.png"), g.rgb);
  write_png(dir / (prefix + "_normal.png"), g.normal_8);
  write_png_gray16(dir / (prefix + "_depth_q.png"), g.depth_q);
}

}  // namespace scenetext
