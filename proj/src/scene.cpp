#include "scenetext/scene.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "scenetext/errors.hpp"

namespace scenetext {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write: " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

Vec3 vec3_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ValidationError(std::string(what) + " must be [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Rgb rgb_from(const json& j, const char* what) {
  const Vec3 c = vec3_from(j, what);
  if ((c.array() < 0.0).any() || (c.array() > 1.0).any())
    throw ValidationError(std::string(what) + " components must lie in [0, 1]");
  return c;
}

const char* kind_name(LightKind kind) {
  switch (kind) {
    case LightKind::directional: return "directional";
    case LightKind::point: return "point";
    case LightKind::ambient: return "ambient";
  }
  return "directional";
}

LightKind kind_from(const std::string& s) {
  if (s == "directional") return LightKind::directional;
  if (s == "point") return LightKind::point;
  if (s == "ambient") return LightKind::ambient;
  throw ValidationError("unknown light kind: " + s);
}

// Normalizes only vectors that are measurably off unit length so that already-normalized
// data survives a load/save cycle bit-for-bit.
Vec3 unitize(const Vec3& v) {
  const double n = v.norm();
  if (n == 0.0) return v;
  return std::abs(n - 1.0) > 1e-12 ? Vec3(v / n) : v;
}

}  // namespace

Rgb Material::sample(const Vec2& uv) const {
  if (!texture || texture->empty()) return albedo;
  const double u = uv.x() - std::floor(uv.x());
  const double v = uv.y() - std::floor(uv.y());
  const int x = std::min(texture->width - 1, static_cast<int>(u * texture->width));
  const int y = std::min(texture->height - 1, static_cast<int>(v * texture->height));
  const std::uint8_t* p = texture->at(x, y);
  return Rgb(p[0], p[1], p[2]) / 255.0;
}

IlluminationPreset IlluminationPreset::named(const std::string& name) {
  if (name == "normal") return {"normal", 1.0, std::nullopt};
  if (name == "bright") return {"bright", 2.0, std::nullopt};
  if (name == "dark") return {"dark", 0.35, std::nullopt};
  if (name == "fog") return {"fog", 1.0, FogSettings{0.08, Rgb(0.7, 0.72, 0.75)}};
  throw ValidationError("unknown illumination preset: " + name);
}

std::size_t Scene::triangle_count() const {
  std::size_t n = 0;
  for (const auto& m : meshes) n += m.mesh.triangle_count();
  return n;
}

const Material& Scene::material_of(std::size_t mesh_index) const {
  static const Material kDefault{};
  const auto it = materials.find(meshes[mesh_index].material);
  return it == materials.end() ? kDefault : it->second;
}

std::vector<TriMesh> Scene::trimeshes() const {
  std::vector<TriMesh> out;
  out.reserve(meshes.size());
  for (const auto& m : meshes) out.push_back(m.mesh);
  return out;
}

void Scene::finalize() {
  if (meshes.empty()) throw ValidationError("scene has no meshes");
  if (!(z_max > 0.0) || !std::isfinite(z_max)) throw ValidationError("z_max must be positive");
  for (const auto& m : meshes) {
    m.mesh.validate();
    if (!m.material.empty() && !materials.count(m.material))
      throw ValidationError("unknown material: " + m.material);
  }
  for (const auto& [name, mat] : materials)
    if (mat.ambient < 0 || mat.ambient > 1 || mat.diffuse < 0 || mat.diffuse > 1)
      throw ValidationError("material coefficients out of range: " + name);
  for (const auto& l : lights) {
    if (l.intensity < 0) throw ValidationError("light intensity must be non-negative");
    if (l.kind == LightKind::directional && std::abs(l.direction.norm() - 1.0) > 1e-6)
      throw ValidationError("directional light direction must be unit length");
    if (l.kind == LightKind::point && !l.position.allFinite())
      throw ValidationError("point light position must be finite");
  }
  if (!(fog.density >= 0.0) || !std::isfinite(fog.density))
    throw ValidationError("fog density must be finite and non-negative");
  validate_anchors(anchors);
  const auto tm = trimeshes();
  accel_ = std::make_shared<const AccelIndex>(tm);
}

const AccelIndex& Scene::accel() const {
  if (!accel_) throw ValidationError("scene not finalized");
  return *accel_;
}

json anchor_to_json(const CameraAnchor& a) {
  json j;
  j["id"] = a.id;
  j["position"] = to_json(a.position);
  j["yaw"] = a.yaw;
  j["pitch"] = a.pitch;
  j["roll"] = a.roll;
  j["label"] = a.label;
  return j;
}

CameraAnchor anchor_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("anchor must be an object");
  CameraAnchor a;
  a.id = j.value("id", std::string());
  a.position = vec3_from(j.at("position"), "anchor position");
  a.yaw = j.value("yaw", 0.0);
  a.pitch = j.value("pitch", 0.0);
  a.roll = j.value("roll", 0.0);
  a.label = j.value("label", std::string());
  if (!a.position.allFinite() || !std::isfinite(a.yaw) || !std::isfinite(a.pitch) ||
      !std::isfinite(a.roll))
    throw ValidationError("anchor pose must be finite");
  return a;
}

void validate_anchors(const std::vector<CameraAnchor>& anchors) {
  std::set<std::string> seen;
  for (const auto& a : anchors) {
    if (a.id.empty()) throw ValidationError("anchor id must not be empty");
    if (!seen.insert(a.id).second) throw ValidationError("duplicate anchor id: " + a.id);
  }
}

fs::path anchors_sidecar_path(const fs::path& scene_path) {
  return scene_path.parent_path() / "anchors.json";
}

std::vector<CameraAnchor> read_anchors_file(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw LoadError("malformed anchors file " + path.string() + ": " + e.what());
  }
  const json& list = j.is_object() ? j.at("anchors") : j;
  std::vector<CameraAnchor> anchors;
  for (const auto& a : list) anchors.push_back(anchor_from_json(a));
  validate_anchors(anchors);
  return anchors;
}

void write_anchors_file(const fs::path& path, const std::vector<CameraAnchor>& anchors) {
  json list = json::array();
  for (const auto& a : anchors) list.push_back(anchor_to_json(a));
  const json doc = {{"anchors", list}};
  fs::path tmp = path;
  tmp += ".tmp";
  write_text(tmp, doc.dump(2) + "\n");
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot replace " + path.string() + ": " + ec.message());
}

Scene load_scene(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw LoadError("malformed scene file " + path.string() + ": " + e.what());
  }
  const fs::path base = path.parent_path();
  Scene scene;
  scene.id = path.parent_path().filename().string();
  if (scene.id.empty() || scene.id == ".") scene.id = path.stem().string();
  try {
    scene.id = doc.value("id", scene.id);
    if (doc.contains("materials")) {
      for (const auto& [name, m] : doc.at("materials").items()) {
        Material mat;
        if (m.contains("albedo")) mat.albedo = rgb_from(m.at("albedo"), "albedo");
        mat.ambient = m.value("ambient", 1.0);
        mat.diffuse = m.value("diffuse", 1.0);
        mat.texture_path = m.value("texture", std::string());
        if (!mat.texture_path.empty()) {
          const fs::path tex = base / mat.texture_path;
          if (!fs::exists(tex)) throw LoadError("texture not found: " + mat.texture_path);
          mat.texture = std::make_shared<const RgbImage>(read_png_rgb(tex));
        }
        scene.materials.emplace(name, std::move(mat));
      }
    }
    for (const auto& m : doc.at("meshes")) {
      SceneMesh sm;
      sm.path = m.at("path").get<std::string>();
      sm.material = m.value("material", std::string());
      const fs::path mesh_path = base / sm.path;
      if (!fs::exists(mesh_path)) throw LoadError("mesh not found: " + sm.path);
      sm.mesh = read_obj(mesh_path);
      scene.meshes.push_back(std::move(sm));
    }
    if (doc.contains("lights")) {
      for (const auto& l : doc.at("lights")) {
        Light light;
        light.kind = kind_from(l.at("kind").get<std::string>());
        if (l.contains("color")) light.color = rgb_from(l.at("color"), "light color");
        light.intensity = l.value("intensity", 1.0);
        if (l.contains("direction")) light.direction = vec3_from(l.at("direction"), "direction");
        if (l.contains("position")) light.position = vec3_from(l.at("position"), "position");
        scene.lights.push_back(light);
      }
    }
    if (doc.contains("fog")) {
      scene.fog.density = doc.at("fog").value("density", 0.0);
      if (doc.at("fog").contains("color"))
        scene.fog.color = rgb_from(doc.at("fog").at("color"), "fog color");
    }
    if (doc.contains("background")) scene.background = rgb_from(doc.at("background"), "background");
    scene.z_max = doc.value("z_max", 50.0);
    if (doc.contains("anchors"))
      for (const auto& a : doc.at("anchors")) scene.anchors.push_back(anchor_from_json(a));
  } catch (const json::exception& e) {
    throw LoadError("invalid scene file " + path.string() + ": " + e.what());
  }
  const fs::path sidecar = anchors_sidecar_path(path);
  if (fs::exists(sidecar)) scene.anchors = read_anchors_file(sidecar);
  scene.finalize();
  return scene;
}

json scene_to_json(const Scene& scene) {
  json doc;
  doc["id"] = scene.id;
  json mats = json::object();
  for (const auto& [name, m] : scene.materials) {
    json jm;
    jm["albedo"] = to_json(m.albedo);
    jm["ambient"] = m.ambient;
    jm["diffuse"] = m.diffuse;
    if (!m.texture_path.empty()) jm["texture"] = m.texture_path;
    mats[name] = jm;
  }
  doc["materials"] = mats;
  json meshes = json::array();
  for (const auto& m : scene.meshes) meshes.push_back({{"path", m.path}, {"material", m.material}});
  doc["meshes"] = meshes;
  json lights = json::array();
  for (const auto& l : scene.lights) {
    json jl;
    jl["kind"] = kind_name(l.kind);
    jl["color"] = to_json(l.color);
    jl["intensity"] = l.intensity;
    if (l.kind == LightKind::directional) jl["direction"] = to_json(l.direction);
    if (l.kind == LightKind::point) jl["position"] = to_json(l.position);
    lights.push_back(jl);
  }
  doc["lights"] = lights;
  doc["fog"] = {{"density", scene.fog.density}, {"color", to_json(scene.fog.color)}};
  doc["background"] = to_json(scene.background);
  doc["z_max"] = scene.z_max;
  json anchors = json::array();
  for (const auto& a : scene.anchors) anchors.push_back(anchor_to_json(a));
  doc["anchors"] = anchors;
  return doc;
}

void save_scene(const Scene& scene, const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& m : scene.meshes) write_obj(dir / m.path, m.mesh);
  write_text(dir / "scene.json", scene_to_json(scene).dump(2) + "\n");
}

TriMesh read_obj(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("mesh not found: " + path.string());

  std::vector<Vec3> positions, normals;
  std::vector<Vec2> uvs;
  struct Corner {
    int v, vt, vn;
    bool operator==(const Corner&) const = default;
  };
  std::vector<std::array<Corner, 3>> faces;

  const auto resolve = [](int idx, std::size_t count) {
    return idx < 0 ? static_cast<int>(count) + idx : idx - 1;
  };

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 p;
      ls >> p.x() >> p.y() >> p.z();
      positions.push_back(p);
    } else if (tag == "vn") {
      Vec3 n;
      ls >> n.x() >> n.y() >> n.z();
      normals.push_back(unitize(n));
    } else if (tag == "vt") {
      Vec2 t;
      ls >> t.x() >> t.y();
      uvs.push_back(t);
    } else if (tag == "f") {
      std::vector<Corner> poly;
      std::string tok;
      while (ls >> tok) {
        Corner c{-1, -1, -1};
        int field = 0;
        std::size_t start = 0;
        while (start <= tok.size()) {
          const std::size_t slash = tok.find('/', start);
          const std::string part =
              tok.substr(start, slash == std::string::npos ? std::string::npos : slash - start);
          if (!part.empty()) {
            const int idx = std::stoi(part);
            if (field == 0) c.v = resolve(idx, positions.size());
            if (field == 1) c.vt = resolve(idx, uvs.size());
            if (field == 2) c.vn = resolve(idx, normals.size());
          }
          if (slash == std::string::npos) break;
          start = slash + 1;
          ++field;
        }
        poly.push_back(c);
      }
      if (poly.size() < 3)
        throw LoadError(fmt::format("{}:{}: face with fewer than 3 vertices", path.string(), line_no));
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) faces.push_back({poly[0], poly[k], poly[k + 1]});
    }
  }

  TriMesh mesh;
  bool all_normals = !faces.empty(), all_uvs = !faces.empty(), aligned = true;
  for (const auto& f : faces)
    for (const auto& c : f) {
      if (c.v < 0 || c.v >= static_cast<int>(positions.size()))
        throw LoadError("face references missing vertex in " + path.string());
      if (c.vn < 0 || c.vn >= static_cast<int>(normals.size())) all_normals = false;
      if (c.vt < 0 || c.vt >= static_cast<int>(uvs.size())) all_uvs = false;
      if ((c.vn >= 0 && c.vn != c.v) || (c.vt >= 0 && c.vt != c.v)) aligned = false;
    }
  if (all_normals && normals.size() != positions.size()) aligned = false;
  if (all_uvs && uvs.size() != positions.size()) aligned = false;

  if (aligned) {
    // Attribute streams share indices with positions: keep the vertex order as written.
    mesh.vertices = positions;
    if (all_normals) mesh.normals = normals;
    if (all_uvs) mesh.uvs = uvs;
    for (const auto& f : faces) mesh.triangles.emplace_back(f[0].v, f[1].v, f[2].v);
  } else {
    struct Hash {
      std::size_t operator()(const Corner& c) const {
        return std::hash<long long>()((static_cast<long long>(c.v) * 1000003LL + c.vt) * 1000003LL + c.vn);
      }
    };
    std::unordered_map<Corner, int, Hash> remap;
    for (const auto& f : faces) {
      Eigen::Vector3i tri;
      for (int k = 0; k < 3; ++k) {
        Corner key = f[k];
        if (!all_normals) key.vn = -1;
        if (!all_uvs) key.vt = -1;
        auto [it, inserted] = remap.try_emplace(key, static_cast<int>(mesh.vertices.size()));
        if (inserted) {
          mesh.vertices.push_back(positions[key.v]);
          if (all_normals) mesh.normals.push_back(normals[key.vn]);
          if (all_uvs) mesh.uvs.push_back(uvs[key.vt]);
        }
        tri[k] = it->second;
      }
      mesh.triangles.push_back(tri);
    }
  }
  try {
    mesh.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(path.filename().string() + ": " + e.what());
  }
  return mesh;
}

std::string obj_to_string(const TriMesh& mesh) {
  std::string out;
  for (const auto& v : mesh.vertices) out += fmt::format("v {} {} {}\n", v.x(), v.y(), v.z());
  for (const auto& t : mesh.uvs) out += fmt::format("vt {} {}\n", t.x(), t.y());
  for (const auto& n : mesh.normals) out += fmt::format("vn {} {} {}\n", n.x(), n.y(), n.z());
  for (const auto& f : mesh.triangles) {
    out += "f";
    for (int k = 0; k < 3; ++k) {
      const int i = f[k] + 1;
      if (mesh.has_uvs() && mesh.has_normals())
        out += fmt::format(" {}/{}/{}", i, i, i);
      else if (mesh.has_uvs())
        out += fmt::format(" {}/{}", i, i);
      else if (mesh.has_normals())
        out += fmt::format(" {}//{}", i, i);
      else
        out += fmt::format(" {}", i);
    }
    out += "\n";
  }
  return out;
}

void write_obj(const fs::path& path, const TriMesh& mesh) { write_text(path, obj_to_string(mesh)); }

}  // namespace scenetext
