#include "scenetext/placement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scenetext/errors.hpp"

namespace scenetext {

std::optional<Vec3> refine_point(const Vec3& coarse, const Vec3& camera, const AccelIndex& accel) {
  const Vec3 d = coarse - camera;
  const double len = d.norm();
  if (!(len > 0.0)) throw DomainError("refine_point: coarse point equals the camera position");
  const auto hit = accel.raycast({camera, d / len});
  if (!hit || hit->t > 2.0 * len) return std::nullopt;
  return hit->point;
}

std::optional<Quad3D> lift_region(const TextRegion2D& region, const GBuffer& g, double z_max,
                                  const CameraIntrinsics& intrinsics, const CameraPose& pose,
                                  const AccelIndex& accel) {
  if (region.x1 < 0 || region.y1 < 0 || region.x2 > g.width || region.y2 > g.height ||
      region.width() <= 0 || region.height() <= 0)
    throw DomainError("region outside the G-buffer");
  const std::array<std::array<int, 2>, 4> px{{{region.x1, region.y1},
                                              {region.x2 - 1, region.y1},
                                              {region.x2 - 1, region.y2 - 1},
                                              {region.x1, region.y2 - 1}}};
  Quad3D quad;
  for (int k = 0; k < 4; ++k) {
    const auto [x, y] = px[k];
    if (!g.hit_mask(y, x)) return std::nullopt;
    const double depth = dequantize_depth(g.depth_q(y, x), z_max);
    const Vec3 coarse = unproject(Vec2(x + 0.5, y + 0.5), depth, intrinsics, pose);
    const auto fine = refine_point(coarse, pose.position, accel);
    if (!fine) return std::nullopt;
    quad.corners[k] = *fine;
  }
  Vec3 sum = Vec3::Zero();
  for (int y = region.y1; y < region.y2; ++y)
    for (int x = region.x1; x < region.x2; ++x)
      if (g.hit_mask(y, x)) sum += g.normal(x, y);
  if (sum.norm() < 1e-12) return std::nullopt;
  quad.normal = sum.normalized();
  return quad;
}

namespace {

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double signed_area(const std::array<Vec2, 4>& poly) {
  double a = 0.0;
  for (int k = 0; k < 4; ++k) a += cross2(poly[k], poly[(k + 1) % 4]);
  return 0.5 * a;
}

// Point in a simple polygon, boundary included within `tol`.
bool inside(const std::array<Vec2, 4>& poly, const Vec2& p, double tol) {
  bool in = false;
  for (int k = 0, l = 3; k < 4; l = k++) {
    const Vec2& a = poly[l];
    const Vec2& b = poly[k];
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    if ((a + t * ab - p).norm() <= tol) return true;
    if ((a.y() > p.y()) != (b.y() > p.y()) &&
        p.x() < a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y()))
      in = !in;
  }
  return in;
}

}  // namespace

std::optional<Rect3D> rectify(const Quad3D& quad, const Vec3& up, const Vec3& fallback_right) {
  const Vec3 n = quad.normal.normalized();
  Vec3 centroid = Vec3::Zero();
  for (const auto& c : quad.corners) centroid += c;
  centroid /= 4.0;

  Vec3 u = up.cross(n);
  u -= u.dot(n) * n;
  if (u.norm() < 1e-6) {
    u = fallback_right - fallback_right.dot(n) * n;
    if (u.norm() < 1e-6) return std::nullopt;
  }
  u.normalize();
  const Vec3 v = n.cross(u);

  std::array<Vec2, 4> poly;
  for (int k = 0; k < 4; ++k) {
    const Vec3 d = quad.corners[k] - centroid;
    poly[k] = {d.dot(u), d.dot(v)};
  }
  if (std::abs(signed_area(poly)) < 1e-6) return std::nullopt;

  // Sides: a_lo (left), a_hi (right), b_lo (bottom), b_hi (top).
  double a_lo = std::numeric_limits<double>::infinity(), a_hi = -a_lo, b_lo = a_lo, b_hi = -a_lo;
  for (const auto& p : poly) {
    a_lo = std::min(a_lo, p.x());
    a_hi = std::max(a_hi, p.x());
    b_lo = std::min(b_lo, p.y());
    b_hi = std::max(b_hi, p.y());
  }
  const double step_a = kClipStep * (a_hi - a_lo), step_b = kClipStep * (b_hi - b_lo);
  const double tol = 1e-9 * std::max(a_hi - a_lo, b_hi - b_lo);

  bool ok = false;
  for (int iter = 0; iter <= kMaxClipIterations; ++iter) {
    // Corners: bottom-left, bottom-right, top-right, top-left.
    const bool bl = inside(poly, {a_lo, b_lo}, tol), br = inside(poly, {a_hi, b_lo}, tol);
    const bool tr = inside(poly, {a_hi, b_hi}, tol), tl = inside(poly, {a_lo, b_hi}, tol);
    if (bl && br && tr && tl) {
      ok = true;
      break;
    }
    if (iter == kMaxClipIterations) break;
    if (!bl || !tl) a_lo += step_a;
    if (!br || !tr) a_hi -= step_a;
    if (!bl || !br) b_lo += step_b;
    if (!tl || !tr) b_hi -= step_b;
    if (a_hi - a_lo <= tol || b_hi - b_lo <= tol) return std::nullopt;
  }
  if (!ok) return std::nullopt;

  Rect3D rect;
  rect.origin = centroid + a_lo * u + b_lo * v;
  rect.u = (a_hi - a_lo) * u;
  rect.v = (b_hi - b_lo) * v;
  return rect;
}

// ---------------------------------------------------------------------------------------

DecalLayer PlacedText::decal() const {
  DecalLayer layer;
  layer.mesh = mesh;
  layer.texture = std::shared_ptr<const RgbaImage>(texture, &texture->rgba);
  for (const auto& w : texture->words)
    layer.word_boxes.emplace_back(Eigen::Vector2d(w.box.x0, w.box.y0), Eigen::Vector2d(w.box.x1, w.box.y1));
  return layer;
}

namespace {

struct SurfaceSample {
  Vec3 point;
  Vec3 normal;
};

// Locates `st` among the mesh's texture-space triangles and interpolates position and normal.
std::optional<SurfaceSample> locate(const PlacedText& placed, const Vec2& st) {
  const TriMesh& mesh = placed.mesh;
  double best_score = -std::numeric_limits<double>::infinity();
  Vec3 best_w = Vec3::Zero();
  std::size_t best_tri = 0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& f = mesh.triangles[t];
    const Vec2 a = mesh.uvs[f[0]], b = mesh.uvs[f[1]], c = mesh.uvs[f[2]];
    const double det = cross2(b - a, c - a);
    if (std::abs(det) < 1e-18) continue;
    const double wb = cross2(st - a, c - a) / det;
    const double wc = cross2(b - a, st - a) / det;
    const Vec3 w(1.0 - wb - wc, wb, wc);
    const double score = w.minCoeff();
    if (score > best_score) {
      best_score = score;
      best_w = w;
      best_tri = t;
      if (score >= 0.0) break;
    }
  }
  if (!std::isfinite(best_score)) return std::nullopt;
  if (best_score < 0.0) {
    best_w = best_w.cwiseMax(0.0);
    best_w /= best_w.sum();
  }
  const auto& f = mesh.triangles[best_tri];
  SurfaceSample s;
  s.point = best_w[0] * mesh.vertices[f[0]] + best_w[1] * mesh.vertices[f[1]] + best_w[2] * mesh.vertices[f[2]];
  s.normal = (best_w[0] * mesh.normals[f[0]] + best_w[1] * mesh.normals[f[1]] + best_w[2] * mesh.normals[f[2]])
                 .normalized();
  return s;
}

Vec2 texel_to_st(const TextTexture& tex, double x, double y) {
  return {x / tex.rgba.width, y / tex.rgba.height};
}

}  // namespace

std::optional<Vec3> surface_at(const PlacedText& placed, const Vec2& st) {
  const auto s = locate(placed, st);
  if (!s) return std::nullopt;
  return s->point;
}

PlacedText deform_text_mesh(const Rect3D& rect, const AccelIndex& accel, GridSize grid,
                            std::shared_ptr<const TextTexture> texture) {
  if (grid.nu < 2 || grid.nv < 2) throw DomainError("text grid needs at least 2 x 2 cells");
  if (!texture) throw DomainError("missing text texture");
  const int nu = grid.nu, nv = grid.nv;
  PlacedText out;
  out.grid = grid;
  out.rect = rect;
  out.texture = texture;

  const Vec3 n = rect.normal();
  const auto corners = rect.corners();
  const double max_dist = 0.1 * (rect.u + rect.v).norm();
  const std::size_t count = static_cast<std::size_t>(nu + 1) * (nv + 1);
  out.base_vertices.resize(count);
  out.offsets.resize(count);
  std::vector<Vec3> normals(count, n);

  for (int j = 0; j <= nv; ++j)
    for (int i = 0; i <= nu; ++i) {
      const int idx = out.vertex(i, j);
      const bool left = i == 0, right = i == nu, top = j == 0, bottom = j == nv;
      Vec3 p;
      bool fixed = true;
      if (top && left) p = corners[0];
      else if (top && right) p = corners[1];
      else if (bottom && right) p = corners[2];
      else if (bottom && left) p = corners[3];
      else {
        fixed = false;
        p = rect.origin + (static_cast<double>(i) / nu) * rect.u +
            (static_cast<double>(nv - j) / nv) * rect.v;
      }
      if (const auto sp = accel.closest_point(p, max_dist)) {
        normals[idx] = sp->normal.dot(n) < 0.0 ? Vec3(-sp->normal) : sp->normal;
        if (!fixed) p = sp->point;
      }
      out.base_vertices[idx] = p;
      out.offsets[idx] = 2.0 * kDecalOffset * normals[idx];
    }

  TriMesh& mesh = out.mesh;
  mesh.vertices.resize(count);
  for (std::size_t k = 0; k < count; ++k) mesh.vertices[k] = out.base_vertices[k] + out.offsets[k];
  mesh.normals = normals;

  // Arc-length texture coordinates: s along each row, r down each column.
  mesh.uvs.assign(count, Vec2::Zero());
  for (int j = 0; j <= nv; ++j) {
    std::vector<double> acc(nu + 1, 0.0);
    for (int i = 1; i <= nu; ++i)
      acc[i] = acc[i - 1] + (out.base_vertices[out.vertex(i, j)] - out.base_vertices[out.vertex(i - 1, j)]).norm();
    for (int i = 0; i <= nu; ++i) mesh.uvs[out.vertex(i, j)].x() = i == nu ? 1.0 : acc[i] / acc[nu];
  }
  for (int i = 0; i <= nu; ++i) {
    std::vector<double> acc(nv + 1, 0.0);
    for (int j = 1; j <= nv; ++j)
      acc[j] = acc[j - 1] + (out.base_vertices[out.vertex(i, j)] - out.base_vertices[out.vertex(i, j - 1)]).norm();
    for (int j = 0; j <= nv; ++j) mesh.uvs[out.vertex(i, j)].y() = j == nv ? 1.0 : acc[j] / acc[nv];
  }

  for (int j = 0; j < nv; ++j)
    for (int i = 0; i < nu; ++i) {
      const int a = out.vertex(i, j), b = out.vertex(i + 1, j);
      const int c = out.vertex(i + 1, j + 1), d = out.vertex(i, j + 1);
      for (const Eigen::Vector3i& f : {Eigen::Vector3i(a, d, c), Eigen::Vector3i(a, c, b)})
        if (triangle_area(mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]) > kDegenerateArea)
          mesh.triangles.push_back(f);
    }

  const TextTexture& tex = *texture;
  for (const auto& w : tex.words) {
    PlacedWord pw;
    pw.text = w.text;
    pw.replaced = w.replaced;
    const double x0 = w.box.x0, y0 = w.box.y0, x1 = w.box.x1, y1 = w.box.y1;
    const std::array<Vec2, 4> box{Vec2(x0, y0), Vec2(x1, y0), Vec2(x1, y1), Vec2(x0, y1)};
    for (int side = 0; side < 4; ++side)
      for (int k = 0; k < kBoundaryPointsPerSide; ++k) {
        const Vec2 p = box[side] + (box[(side + 1) % 4] - box[side]) * (static_cast<double>(k) / kBoundaryPointsPerSide);
        if (const auto s = locate(out, texel_to_st(tex, p.x(), p.y()))) pw.boundary.push_back(s->point);
      }
    for (int b = 0; b < kWordSamplesPerSide; ++b)
      for (int a = 0; a < kWordSamplesPerSide; ++a) {
        const double x = x0 + (a + 0.5) / kWordSamplesPerSide * (x1 - x0);
        const double y = y0 + (b + 0.5) / kWordSamplesPerSide * (y1 - y0);
        if (const auto s = locate(out, texel_to_st(tex, x, y))) {
          pw.samples.push_back(s->point);
          pw.sample_normals.push_back(s->normal);
        }
      }
    for (const auto& c : w.chars) {
      std::array<Vec3, 4> cell;
      const std::array<Vec2, 4> cb{Vec2(c.x0, c.y0), Vec2(c.x1, c.y0), Vec2(c.x1, c.y1), Vec2(c.x0, c.y1)};
      for (int k = 0; k < 4; ++k) cell[k] = locate(out, texel_to_st(tex, cb[k].x(), cb[k].y()))->point;
      pw.chars.push_back(cell);
    }
    out.words.push_back(std::move(pw));
  }
  return out;
}

}  // namespace scenetext
