#include "scenetext/regions.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>

#include "scenetext/errors.hpp"

namespace scenetext {

nlohmann::json to_json(const TextRegion2D& r) {
  return {{"x1", r.x1}, {"y1", r.y1}, {"x2", r.x2}, {"y2", r.y2}};
}

nlohmann::json to_json(const std::vector<TextRegion2D>& regions) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : regions) out.push_back(to_json(r));
  return out;
}

NormalBoundaryMap compute_boundary_map(const RgbImage& normal_8, const Plane<bool>& hit_mask,
                                       int threshold) {
  if (threshold <= 0) throw DomainError("boundary threshold must be positive");
  const int w = normal_8.width, h = normal_8.height;
  if (hit_mask.rows() != h || hit_mask.cols() != w)
    throw ValidationError("hit mask size does not match normal map");
  NormalBoundaryMap out;
  out.threshold = threshold;
  out.bits = Plane<std::uint8_t>::Zero(h, w);
  const auto l1 = [&](int x0, int y0, int x1, int y1) {
    const std::uint8_t* a = normal_8.at(x0, y0);
    const std::uint8_t* b = normal_8.at(x1, y1);
    return std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]) + std::abs(a[2] - b[2]);
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!hit_mask(y, x)) {
        out.bits(y, x) = 1;
        continue;
      }
      int m = 0;
      if (x > 0) m = std::max(m, l1(x, y, x - 1, y));
      if (x + 1 < w) m = std::max(m, l1(x, y, x + 1, y));
      if (y > 0) m = std::max(m, l1(x, y, x, y - 1));
      if (y + 1 < h) m = std::max(m, l1(x, y, x, y + 1));
      out.bits(y, x) = m > threshold ? 1 : 0;
    }
  }
  return out;
}

BoundaryIntegral::BoundaryIntegral(const NormalBoundaryMap& map)
    : table_(Plane<long long>::Zero(map.height() + 1, map.width() + 1)) {
  for (int y = 0; y < map.height(); ++y) {
    long long row = 0;
    for (int x = 0; x < map.width(); ++x) {
      row += map.bits(y, x);
      table_(y + 1, x + 1) = table_(y, x + 1) + row;
    }
  }
}

std::optional<TextRegion2D> stochastic_binary_search(const BoundaryIntegral& map, int cx, int cy,
                                                     Rng& rng, int min_width, int min_height) {
  const int w = map.width(), h = map.height();
  TextRegion2D box{cx - min_width / 2, cy - min_height / 2, cx - min_width / 2 + min_width,
                   cy - min_height / 2 + min_height};
  if (box.x1 < 0 || box.y1 < 0 || box.x2 > w || box.y2 > h) return std::nullopt;
  if (map.sum(box.x1, box.y1, box.x2, box.y2) > 0) return std::nullopt;

  // Each side keeps a feasible edge (lower) and the nearest position known to be
  // infeasible (upper). One step past the image border counts as infeasible, so a side
  // can converge onto the border itself.
  enum Side { left, right, top, bottom };
  struct Bounds {
    int lower, upper;
  };
  std::array<Bounds, 4> b{{{box.x1, -1}, {box.x2, w + 1}, {box.y1, -1}, {box.y2, h + 1}}};

  std::array<int, 4> open{};
  for (;;) {
    int n = 0;
    for (int s = 0; s < 4; ++s)
      if (std::abs(b[s].lower - b[s].upper) > 1) open[n++] = s;
    if (n == 0) break;
    const int side = open[std::uniform_int_distribution<int>(0, n - 1)(rng)];
    auto& [lower, upper] = b[side];
    const int mid = (lower + upper) / 2;  // numerator is never negative here
    long long crossed = 0;
    switch (side) {
      case left: crossed = map.sum(mid, box.y1, box.x2, box.y2); break;
      case right: crossed = map.sum(box.x1, box.y1, mid, box.y2); break;
      case top: crossed = map.sum(box.x1, mid, box.x2, box.y2); break;
      case bottom: crossed = map.sum(box.x1, box.y1, box.x2, mid); break;
    }
    if (crossed >= 1) {
      upper = mid;
    } else {
      lower = mid;
    }
    box = {b[left].lower, b[top].lower, b[right].lower, b[bottom].lower};
  }
  return box;
}

std::optional<TextRegion2D> stochastic_binary_search(const NormalBoundaryMap& map, int cx, int cy,
                                                     Rng& rng, int min_width, int min_height) {
  return stochastic_binary_search(BoundaryIntegral(map), cx, cy, rng, min_width, min_height);
}

std::vector<TextRegion2D> propose_regions(const NormalBoundaryMap& map, const ProposalConfig& config,
                                          Rng& rng) {
  if (config.threshold <= 0 || config.strides.empty() || config.min_width <= 0 ||
      config.min_height <= 0)
    throw ConfigError("invalid proposal config");
  for (int s : config.strides)
    if (s <= 0) throw ConfigError("strides must be positive");

  const BoundaryIntegral integral(map);
  const int stride = config.strides[std::uniform_int_distribution<std::size_t>(
      0, config.strides.size() - 1)(rng)];
  const int hw = config.min_width / 2, hh = config.min_height / 2;

  std::vector<TextRegion2D> candidates;
  for (int cy = hh; cy + (config.min_height - hh) <= map.height(); cy += stride)
    for (int cx = hw; cx + (config.min_width - hw) <= map.width(); cx += stride)
      if (auto r = stochastic_binary_search(integral, cx, cy, rng, config.min_width, config.min_height))
        candidates.push_back(*r);

  std::shuffle(candidates.begin(), candidates.end(), rng);
  std::vector<TextRegion2D> kept;
  for (const auto& c : candidates)
    if (std::none_of(kept.begin(), kept.end(), [&](const TextRegion2D& k) { return k.overlaps(c); }))
      kept.push_back(c);
  return kept;
}

}  // namespace scenetext
