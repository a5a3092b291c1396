#include "scenetext/sample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace scenetext {

std::vector<Viewpoint> sample_viewpoints(const CameraAnchor& anchor, int n, const ViewpointRanges& ranges,
                                         Rng& rng, const std::function<bool(const CameraPose&)>& accept) {
  if (n < 1) throw DomainError("viewpoint count must be at least 1");
  if (ranges.radius < 0.0 || ranges.angle_deg < 0.0) throw DomainError("negative viewpoint range");
  std::normal_distribution<double> gauss;
  const auto draw = [&] {
    Viewpoint vp = Viewpoint::of(anchor);
    Vec3 dir(gauss(rng), gauss(rng), gauss(rng));
    const double len = dir.norm();
    const double r = ranges.radius * std::cbrt(uniform(rng, 0.0, 1.0));
    if (len > 0.0) vp.position += (r / len) * dir;
    vp.yaw += uniform(rng, -ranges.angle_deg, ranges.angle_deg);
    vp.pitch += uniform(rng, -ranges.angle_deg, ranges.angle_deg);
    return vp;
  };
  std::vector<Viewpoint> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    Viewpoint chosen = Viewpoint::of(anchor);
    for (int attempt = 0; attempt < kViewpointAttempts; ++attempt) {
      const Viewpoint vp = draw();
      if (!accept || accept(vp.pose())) {
        chosen = vp;
        break;
      }
    }
    out.push_back(chosen);
  }
  return out;
}

double compute_visibility(const PlacedWord& word, const CameraPose& pose,
                          const CameraIntrinsics& intrinsics, const AccelIndex& accel) {
  if (word.samples.empty()) return 0.0;
  int visible = 0;
  for (std::size_t k = 0; k < word.samples.size(); ++k) {
    const Vec3& p = word.samples[k];
    const auto px = project(p, intrinsics, pose);
    if (!px || px->pixel.x() < 0.0 || px->pixel.y() < 0.0 || px->pixel.x() >= intrinsics.width ||
        px->pixel.y() >= intrinsics.height)
      continue;
    const Vec3 to_camera = pose.position - p;
    if (word.sample_normals[k].dot(to_camera) <= 0.0) continue;
    const double dist = to_camera.norm();
    const auto hit = accel.raycast({pose.position, -to_camera / dist});
    if (hit && hit->t < dist - kSurfaceTolerance) continue;
    ++visible;
  }
  return static_cast<double>(visible) / static_cast<double>(word.samples.size());
}

namespace {

double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() != b.x() ? a.x() < b.x() : a.y() < b.y();
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

// Screen-clockwise (y down) order starting from the corner with the smallest x + y.
std::array<Vec2, 4> order_corners(std::array<Vec2, 4> c) {
  double area = 0.0;
  for (int k = 0; k < 4; ++k) area += c[k].x() * c[(k + 1) % 4].y() - c[(k + 1) % 4].x() * c[k].y();
  if (area < 0.0) std::swap(c[1], c[3]);
  int start = 0;
  for (int k = 1; k < 4; ++k)
    if (c[k].sum() < c[start].sum() - 1e-9) start = k;
  std::rotate(c.begin(), c.begin() + start, c.end());
  return c;
}

// Convex polygon clipped to the box [x0, x1] x [y0, y1] (Sutherland-Hodgman).
std::vector<Vec2> clip_to_box(const std::vector<Vec2>& polygon, double x0, double y0, double x1, double y1) {
  std::vector<Vec2> out = polygon;
  const auto clip = [&](int axis, double bound, bool keep_below) {
    std::vector<Vec2> in;
    in.swap(out);
    const auto inside = [&](const Vec2& q) { return keep_below ? q[axis] <= bound : q[axis] >= bound; };
    for (std::size_t i = 0; i < in.size(); ++i) {
      const Vec2& a = in[i];
      const Vec2& b = in[(i + 1) % in.size()];
      if (inside(a)) out.push_back(a);
      if (inside(a) != inside(b)) {
        Vec2 x = a + (bound - a[axis]) / (b[axis] - a[axis]) * (b - a);
        x[axis] = bound;
        out.push_back(x);
      }
    }
  };
  clip(0, x0, false);
  clip(0, x1, true);
  clip(1, y0, false);
  clip(1, y1, true);
  std::vector<Vec2> dedup;
  for (const auto& q : out)
    if (dedup.empty() || (q - dedup.back()).norm() > 1e-9) dedup.push_back(q);
  while (dedup.size() > 1 && (dedup.front() - dedup.back()).norm() <= 1e-9) dedup.pop_back();
  return dedup;
}

// Reduces a convex polygon to four vertices that still enclose it and stay inside the box:
// each step drops one edge by extending its two neighbors to their intersection, choosing
// the smallest added area. Empty if no such reduction exists.
std::vector<Vec2> reduce_to_quad(std::vector<Vec2> poly, double x0, double y0, double x1, double y1) {
  constexpr double eps = 1e-9;
  if (poly.size() < 3) return {};
  while (poly.size() > 4) {
    const std::size_t n = poly.size();
    double best_area = std::numeric_limits<double>::infinity();
    std::size_t best = n;
    Vec2 best_x;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& prev = poly[(i + n - 1) % n];
      const Vec2& a = poly[i];
      const Vec2& b = poly[(i + 1) % n];
      const Vec2& next = poly[(i + 2) % n];
      const Vec2 da = a - prev, db = b - next;
      const double det = da.x() * (-db.y()) + db.x() * da.y();
      if (std::abs(det) < eps) continue;
      // a + s*da = b + r*db with s, r >= 0 puts the intersection beyond the dropped edge.
      const Vec2 rhs = b - a;
      const double s = (rhs.x() * (-db.y()) + db.x() * rhs.y()) / det;
      const double r = (da.x() * rhs.y() - da.y() * rhs.x()) / det;
      if (s < -eps || r < -eps) continue;
      const Vec2 x = a + s * da;
      if (x.x() < x0 - eps || x.x() > x1 + eps || x.y() < y0 - eps || x.y() > y1 + eps) continue;
      const double area = std::abs(cross2(a, x, b)) / 2;
      if (area < best_area) {
        best_area = area;
        best = i;
        best_x = x.cwiseMax(Vec2(x0, y0)).cwiseMin(Vec2(x1, y1));
      }
    }
    if (best == n) return {};
    poly[best] = best_x;
    poly.erase(poly.begin() + static_cast<std::ptrdiff_t>((best + 1) % n));
  }
  if (poly.size() == 3) {
    std::size_t longest = 0;
    for (std::size_t i = 1; i < 3; ++i)
      if ((poly[(i + 1) % 3] - poly[i]).norm() > (poly[(longest + 1) % 3] - poly[longest]).norm()) longest = i;
    poly.insert(poly.begin() + static_cast<std::ptrdiff_t>(longest + 1),
                (poly[longest] + poly[(longest + 1) % 3]) / 2);
  }
  return poly;
}

}  // namespace

std::array<Vec2, 4> min_area_rect(const std::vector<Vec2>& points) {
  if (points.empty()) throw DomainError("min_area_rect needs at least one point");
  const std::vector<Vec2> hull = convex_hull(points);
  if (hull.size() == 1) return {hull[0], hull[0], hull[0], hull[0]};
  double best = std::numeric_limits<double>::infinity();
  std::array<Vec2, 4> rect;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec2 e = (hull[(i + 1) % hull.size()] - hull[i]).normalized();
    const Vec2 p(-e.y(), e.x());
    double a_lo = std::numeric_limits<double>::infinity(), a_hi = -a_lo, b_lo = a_lo, b_hi = -a_lo;
    for (const auto& q : hull) {
      a_lo = std::min(a_lo, q.dot(e));
      a_hi = std::max(a_hi, q.dot(e));
      b_lo = std::min(b_lo, q.dot(p));
      b_hi = std::max(b_hi, q.dot(p));
    }
    const double area = (a_hi - a_lo) * (b_hi - b_lo);
    if (area < best - 1e-12) {
      best = area;
      rect = {a_lo * e + b_lo * p, a_hi * e + b_lo * p, a_hi * e + b_hi * p, a_lo * e + b_hi * p};
    }
  }
  return order_corners(rect);
}

IntQuad to_pixel_quad(const std::array<Vec2, 4>& quad, int width, int height) {
  // Pixel centers sit at index + 0.5; move to index space, then grow by one pixel along the
  // rectangle's own axes so that rounding never cuts into it.
  std::array<Vec2, 4> q;
  for (int k = 0; k < 4; ++k) q[k] = quad[k] - Vec2(0.5, 0.5);
  const auto unit = [](const Vec2& d) { return d.norm() > 1e-9 ? Vec2(d.normalized()) : Vec2(Vec2::Zero()); };
  std::array<Vec2, 4> grown;
  for (int k = 0; k < 4; ++k) {
    Vec2 out = unit(q[k] - q[(k + 1) % 4]) + unit(q[k] - q[(k + 3) % 4]);
    if (out.norm() < 1e-9) out = std::array<Vec2, 4>{Vec2(-1, -1), Vec2(1, -1), Vec2(1, 1), Vec2(-1, 1)}[k];
    grown[k] = q[k] + out;
  }
  // Clip to the pixel-index box and re-close as a quad, so that the border never cuts into
  // a tilted rectangle the way clamping its corners one by one would.
  const double xmax = width - 1, ymax = height - 1;
  const auto fitted = reduce_to_quad(clip_to_box({grown.begin(), grown.end()}, 0, 0, xmax, ymax), 0, 0, xmax, ymax);
  if (fitted.size() == 4) grown = order_corners({fitted[0], fitted[1], fitted[2], fitted[3]});
  IntQuad result;
  for (int k = 0; k < 4; ++k) {
    result[2 * k] = std::clamp(static_cast<int>(std::lround(grown[k].x())), 0, width - 1);
    result[2 * k + 1] = std::clamp(static_cast<int>(std::lround(grown[k].y())), 0, height - 1);
  }
  return result;
}

bool quad_contains(const IntQuad& quad, double x, double y) {
  bool in = false;
  for (int k = 0, l = 3; k < 4; l = k++) {
    const double ax = quad[2 * l], ay = quad[2 * l + 1], bx = quad[2 * k], by = quad[2 * k + 1];
    const double dx = bx - ax, dy = by - ay;
    const double len2 = dx * dx + dy * dy;
    const double t = len2 > 0 ? std::clamp(((x - ax) * dx + (y - ay) * dy) / len2, 0.0, 1.0) : 0.0;
    if (std::hypot(ax + t * dx - x, ay + t * dy - y) <= 1e-9) return true;
    if ((ay > y) != (by > y) && x < ax + (y - ay) * dx / dy) in = !in;
  }
  return in;
}

std::vector<WordAnnotation> annotate(const std::vector<PlacedText>& texts, const CameraPose& pose,
                                     const CameraIntrinsics& intrinsics, const AccelIndex& accel,
                                     const AnnotationPolicy& policy) {
  std::vector<WordAnnotation> out;
  const auto projected = [&](const auto& points) {
    std::vector<Vec2> px;
    for (const Vec3& p : points)
      if (const auto pd = project(p, intrinsics, pose)) px.push_back(pd->pixel);
    return px;
  };
  // Rectangle around the in-image part only; clamping the corners of a tilted rectangle that
  // extends past the border would cut into the word.
  const auto fit = [&](const std::vector<Vec2>& pts) {
    std::vector<Vec2> clipped = clip_to_box(convex_hull(pts), 0, 0, intrinsics.width, intrinsics.height);
    if (clipped.empty()) clipped = pts;
    return to_pixel_quad(min_area_rect(clipped), intrinsics.width, intrinsics.height);
  };
  for (std::size_t ti = 0; ti < texts.size(); ++ti) {
    for (std::size_t wi = 0; wi < texts[ti].words.size(); ++wi) {
      const PlacedWord& word = texts[ti].words[wi];
      const double visibility = compute_visibility(word, pose, intrinsics, accel);
      if (visibility <= 0.0) continue;
      const auto pts = projected(word.boundary);
      if (pts.empty()) continue;
      WordAnnotation a;
      a.quad = fit(pts);
      a.transcription = word.text;
      a.visibility = visibility;
      a.ignore = visibility < policy.keep_threshold || word.replaced;
      a.text_index = static_cast<int>(ti);
      a.word_index = static_cast<int>(wi);
      if (policy.character_quads)
        for (const auto& cell : word.chars) {
          const auto cpts = projected(cell);
          if (cpts.size() == 4) a.chars.push_back(fit(cpts));
        }
      out.push_back(std::move(a));
    }
  }
  return out;
}

RenderWorld make_world(const Scene& scene, const std::vector<PlacedText>& texts) {
  std::vector<DecalLayer> decals;
  decals.reserve(texts.size());
  for (const auto& t : texts) decals.push_back(t.decal());
  return RenderWorld(scene, std::move(decals));
}

Plane<std::int32_t> render_word_ids(const RenderWorld& world, const CameraPose& pose,
                                    const CameraIntrinsics& intrinsics) {
  intrinsics.validate();
  Plane<std::int32_t> ids = Plane<std::int32_t>::Zero(intrinsics.height, intrinsics.width);
  for_each_row(intrinsics.height, [&](int y) {
    for (int x = 0; x < intrinsics.width; ++x) {
      Ray3 ray = pixel_ray(Vec2(x + 0.5, y + 0.5), intrinsics, pose);
      for (int layer = 0; layer < 4; ++layer) {
        const auto hit = world.accel().raycast(ray);
        if (!hit || !world.is_decal(hit->mesh_id)) break;
        const DecalLayer& decal = world.decal(hit->mesh_id);
        const Vec2 uv = hit_uv(decal.mesh, *hit);
        if (sample_rgba(*decal.texture, uv)[3] > 0.0) {
          const Eigen::Vector2d texel(uv.x() * decal.texture->width, uv.y() * decal.texture->height);
          const int text = static_cast<int>(hit->mesh_id - world.scene_mesh_count());
          for (std::size_t w = 0; w < decal.word_boxes.size(); ++w) {
            Eigen::AlignedBox2d box = decal.word_boxes[w];
            box.extend(box.min() - Eigen::Vector2d::Ones()).extend(box.max() + Eigen::Vector2d::Ones());
            if (box.contains(texel)) {
              ids(y, x) = word_id(text, static_cast<int>(w));
              break;
            }
          }
          if (ids(y, x) != 0) break;
        }
        ray = {hit->point, ray.direction};
      }
    }
  });
  return ids;
}

}  // namespace scenetext
