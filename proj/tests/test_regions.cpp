#include <doctest.h>

#include "scenetext/regions.hpp"

using namespace scenetext;

namespace {

Plane<bool> all_hit(int w, int h) { return Plane<bool>::Constant(h, w, true); }

// Boundary rule evaluated literally: max over in-image 4-neighbors of the L1 color distance.
Plane<std::uint8_t> boundary_oracle(const RgbImage& n, int t) {
  Plane<std::uint8_t> out(n.height, n.width);
  const int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
  for (int y = 0; y < n.height; ++y)
    for (int x = 0; x < n.width; ++x) {
      int best = 0;
      for (int k = 0; k < 4; ++k) {
        const int u = x + dx[k], v = y + dy[k];
        if (u < 0 || v < 0 || u >= n.width || v >= n.height) continue;
        int d = 0;
        for (int c = 0; c < 3; ++c) d += std::abs(int(n.at(x, y)[c]) - int(n.at(u, v)[c]));
        best = std::max(best, d);
      }
      out(y, x) = best > t;
    }
  return out;
}

bool box_clear(const NormalBoundaryMap& m, const TextRegion2D& r) {
  for (int y = r.y1; y < r.y2; ++y)
    for (int x = r.x1; x < r.x2; ++x)
      if (m.bits(y, x)) return false;
  return true;
}

// Growing any side by `step` pixels either leaves the image or takes in a boundary pixel.
bool side_maximal(const NormalBoundaryMap& m, const TextRegion2D& r, int step) {
  const TextRegion2D grown[] = {{r.x1 - step, r.y1, r.x2, r.y2},
                                {r.x1, r.y1, r.x2 + step, r.y2},
                                {r.x1, r.y1 - step, r.x2, r.y2},
                                {r.x1, r.y1, r.x2, r.y2 + step}};
  for (const auto& g : grown) {
    if (g.x1 < 0 || g.y1 < 0 || g.x2 > m.width() || g.y2 > m.height()) continue;
    if (box_clear(m, g)) return false;
  }
  return true;
}

NormalBoundaryMap map_of(int w, int h, std::uint8_t fill) {
  NormalBoundaryMap m;
  m.bits = Plane<std::uint8_t>::Constant(h, w, fill);
  return m;
}

}  // namespace

TEST_CASE("constant normals have no boundary") {
  RgbImage n(50, 40, 128);
  CHECK(compute_boundary_map(n, all_hit(50, 40), 100).bits.sum() == 0);
}

TEST_CASE("a vertical seam marks exactly the two adjacent columns") {
  RgbImage n(20, 10);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 20; ++x) {
      std::uint8_t* p = n.at(x, y);
      if (x < 10) p[0] = 255, p[1] = 128, p[2] = 128;
      else p[0] = 128, p[1] = 128, p[2] = 255;
    }
  const auto m = compute_boundary_map(n, all_hit(20, 10), 100);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 20; ++x) CHECK(m.bits(y, x) == (x == 9 || x == 10 ? 1 : 0));
}

TEST_CASE("boundary map equals the per-pixel oracle on random maps") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> byte(0, 255), coin(0, 3);
  for (int i = 0; i < 100; ++i) {
    RgbImage n(64, 64);
    // Blocky maps so that both sides of the threshold occur often.
    const int base[3] = {byte(rng), byte(rng), byte(rng)};
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x)
        for (int c = 0; c < 3; ++c)
          n.at(x, y)[c] = coin(rng) == 0 ? byte(rng) : base[c];
    const auto m = compute_boundary_map(n, all_hit(64, 64), 100);
    CHECK((m.bits == boundary_oracle(n, 100)).all());
  }
}

TEST_CASE("pixels without geometry are boundary") {
  RgbImage n(8, 8, 128);
  Plane<bool> hit = all_hit(8, 8);
  hit(3, 4) = false;
  const auto m = compute_boundary_map(n, hit, 100);
  CHECK(m.bits(3, 4) == 1);
  CHECK(m.bits.sum() == 1);
}

TEST_CASE("unobstructed search returns the whole image") {
  const auto m = map_of(400, 300, 0);
  Rng rng = make_rng(1);
  for (int cx : {48, 200, 351})
    for (int cy : {32, 150, 267}) {
      const auto r = stochastic_binary_search(m, cx, cy, rng);
      REQUIRE(r);
      CHECK(*r == TextRegion2D{0, 0, 400, 300});
    }
}

TEST_CASE("initial box that does not fit yields nothing") {
  auto m = map_of(400, 300, 0);
  Rng rng = make_rng(1);
  CHECK_FALSE(stochastic_binary_search(m, 10, 150, rng));
  m.bits(150, 100) = 1;
  CHECK_FALSE(stochastic_binary_search(m, 100, 150, rng));
}

TEST_CASE("search stops at a vertical wall and every box is maximal") {
  auto m = map_of(400, 300, 0);
  m.bits.col(200).setOnes();
  m.bits(40, 60) = 1;
  m.bits(250, 130) = 1;
  const BoundaryIntegral integral(m);
  for (int seed = 0; seed < 1000; ++seed) {
    Rng rng = make_rng(seed);
    const auto r = stochastic_binary_search(integral, 100, 150, rng);
    REQUIRE(r);
    CHECK(r->x2 <= 200);
    CHECK(r->width() >= 96);
    CHECK(r->height() >= 64);
    CHECK(box_clear(m, *r));
    CHECK(side_maximal(m, *r, 1));
  }
}

TEST_CASE("proposal degenerate maps") {
  Rng rng = make_rng(4);
  CHECK(propose_regions(map_of(300, 200, 1), {}, rng).empty());
  const auto full = propose_regions(map_of(300, 200, 0), {}, rng);
  REQUIRE(full.size() == 1);
  CHECK(full[0] == TextRegion2D{0, 0, 300, 200});
}

TEST_CASE("checkerboard cells contain every proposal") {
  // 150x150 free cells separated by 2-pixel boundary lines.
  const int cell = 150, line = 2, cells = 3, size = cells * cell + (cells + 1) * line;
  auto m = map_of(size, size, 0);
  for (int k = 0; k <= cells; ++k) {
    const int at = k * (cell + line);
    m.bits.block(0, at, size, line).setOnes();
    m.bits.block(at, 0, line, size).setOnes();
  }
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng = make_rng(seed);
    const auto regions = propose_regions(m, {}, rng);
    CHECK(!regions.empty());
    CHECK(regions.size() <= static_cast<std::size_t>(cells * cells));
    for (const auto& r : regions) {
      const int cx = r.x1 / (cell + line), cy = r.y1 / (cell + line);
      const TextRegion2D c{cx * (cell + line) + line, cy * (cell + line) + line, (cx + 1) * (cell + line),
                           (cy + 1) * (cell + line)};
      CHECK(c.contains(r));
      CHECK(r == c);  // each cell is boundary-free, so a maximal box fills it
    }
  }
}

TEST_CASE("proposals never overlap and are reproducible") {
  auto m = map_of(360, 540, 0);
  m.bits.row(300).setOnes();
  m.bits.col(170).segment(0, 300).setOnes();
  Rng a = make_rng(9), b = make_rng(9);
  const auto ra = propose_regions(m, {}, a), rb = propose_regions(m, {}, b);
  CHECK(ra == rb);
  for (std::size_t i = 0; i < ra.size(); ++i)
    for (std::size_t j = i + 1; j < ra.size(); ++j) CHECK_FALSE(ra[i].overlaps(ra[j]));
}
