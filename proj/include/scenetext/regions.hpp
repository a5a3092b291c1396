#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "scenetext/image.hpp"
#include "scenetext/rng.hpp"

namespace scenetext {

/// Binary map of normal discontinuities; 1 marks pixels unsuitable for text.
struct NormalBoundaryMap {
  Plane<std::uint8_t> bits;  // H x W, values 0/1
  int threshold = 100;

  int width() const { return static_cast<int>(bits.cols()); }
  int height() const { return static_cast<int>(bits.rows()); }
};

/// Half-open pixel rectangle [x1, x2) x [y1, y2).
struct TextRegion2D {
  int x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  int width() const { return x2 - x1; }
  int height() const { return y2 - y1; }
  long long area() const { return static_cast<long long>(width()) * height(); }
  bool overlaps(const TextRegion2D& o) const {
    return x1 < o.x2 && o.x1 < x2 && y1 < o.y2 && o.y1 < y2;
  }
  bool contains(const TextRegion2D& o) const {
    return x1 <= o.x1 && y1 <= o.y1 && o.x2 <= x2 && o.y2 <= y2;
  }
  bool operator==(const TextRegion2D&) const = default;
};

nlohmann::json to_json(const TextRegion2D& r);
nlohmann::json to_json(const std::vector<TextRegion2D>& regions);

struct ProposalConfig {
  int threshold = 100;
  int min_width = 96;
  int min_height = 64;
  std::vector<int> strides{12, 24, 36};
};

/// B(i,j) = 1 iff the L1 distance between the 8-bit normal at (i,j) and any in-image
/// 4-neighbor exceeds `threshold`. Pixels without geometry are always 1.
NormalBoundaryMap compute_boundary_map(const RgbImage& normal_8, const Plane<bool>& hit_mask,
                                       int threshold);

/// Summed-area table over a boundary map for O(1) rectangle sums.
class BoundaryIntegral {
public:
  explicit BoundaryIntegral(const NormalBoundaryMap& map);
  /// Number of boundary pixels in [x1, x2) x [y1, y2).
  long long sum(int x1, int y1, int x2, int y2) const {
    return table_(y2, x2) - table_(y1, x2) - table_(y2, x1) + table_(y1, x1);
  }
  int width() const { return static_cast<int>(table_.cols()) - 1; }
  int height() const { return static_cast<int>(table_.rows()) - 1; }

private:
  Plane<long long> table_;
};

/// Grows the min_width x min_height box centered at (cx, cy) by randomized per-side
/// bisection until every side is maximal. nullopt if the initial box leaves the image or
/// already contains a boundary pixel.
std::optional<TextRegion2D> stochastic_binary_search(const BoundaryIntegral& map, int cx, int cy,
                                                     Rng& rng, int min_width = 96,
                                                     int min_height = 64);

std::optional<TextRegion2D> stochastic_binary_search(const NormalBoundaryMap& map, int cx, int cy,
                                                     Rng& rng, int min_width = 96,
                                                     int min_height = 64);

/// Runs the search from a grid of centers (stride drawn from config.strides) and keeps
/// candidates greedily in random order, discarding any that overlaps a kept one.
std::vector<TextRegion2D> propose_regions(const NormalBoundaryMap& map, const ProposalConfig& config,
                                          Rng& rng);

}  // namespace scenetext
