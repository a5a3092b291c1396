#include <doctest.h>

#include "scenetext/text.hpp"
#include "support.hpp"

using namespace scenetext;

namespace {

TextContent content_of(const std::vector<std::string>& lines, TextStructure s = TextStructure::lines) {
  TextContent c;
  c.structure = s;
  c.lines = lines;
  for (std::size_t l = 0; l < lines.size(); ++l) {
    std::istringstream in(lines[l]);
    for (std::string w; in >> w;) c.words.push_back({w, static_cast<int>(l), false});
  }
  return c;
}

double alpha_at(const TextTexture& t, int x, int y) { return t.rgba.at(x, y)[3]; }

}  // namespace

TEST_CASE("single token corpus") {
  const Corpus corpus = Corpus::from_text("alpha\n");
  Rng rng = make_rng(1);
  const TextContent c = sample_text(corpus, TextStructure::word, rng);
  REQUIRE(c.lines.size() == 1);
  CHECK(c.lines[0] == "alpha");
  REQUIRE(c.words.size() == 1);
  CHECK(c.words[0].text == "alpha");
  CHECK_FALSE(c.words[0].replaced);
}

TEST_CASE("empty corpus is a config error") { CHECK_THROWS_AS(Corpus::from_text(" \n\t\n"), ConfigError); }

TEST_CASE("line structures stay within the line caps") {
  const Corpus corpus = Corpus::load(testing::data_dir() / "corpus.txt");
  Rng rng = make_rng(3);
  for (int i = 0; i < 10000; ++i) {
    const TextContent c = sample_text(corpus, TextStructure::lines, rng);
    REQUIRE(!c.lines.empty());
    CHECK(c.lines.size() <= static_cast<std::size_t>(kMaxLines));
    for (const auto& w : c.words) CHECK(w.line < static_cast<int>(c.lines.size()));
  }
  for (int i = 0; i < 1000; ++i)
    CHECK(sample_text(corpus, TextStructure::paragraph, rng).lines.size() <= static_cast<std::size_t>(kMaxParagraphLines));
}

TEST_CASE("text sampling is reproducible") {
  const Corpus corpus = Corpus::load(testing::data_dir() / "corpus.txt");
  for (auto s : {TextStructure::word, TextStructure::lines, TextStructure::paragraph}) {
    Rng a = make_rng(42), b = make_rng(42);
    const auto ca = sample_text(corpus, s, a), cb = sample_text(corpus, s, b);
    CHECK(ca.lines == cb.lines);
  }
}

TEST_CASE("non-ascii characters are replaced and flagged") {
  bool replaced = false;
  CHECK(sanitize_text("caf\xC3\xA9", &replaced) == "caf?");
  CHECK(replaced);
  CHECK(sanitize_text("plain", &replaced) == "plain");
  CHECK_FALSE(replaced);
}

TEST_CASE("one word in the minimum region") {
  const FontLibrary fonts = testing::test_fonts();
  const auto tex = rasterize_text(content_of({"HELLO"}, TextStructure::word), {}, fonts, 96, 64);
  REQUIRE(tex);
  REQUIRE(tex->words.size() == 1);
  CHECK(tex->glyph_height >= kMinGlyphHeight);
  int ink = 0;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 96; ++x) ink += alpha_at(*tex, x, y) > 0;
  CHECK(ink > 0);
}

TEST_CASE("region too small for the text") {
  const FontLibrary fonts = testing::test_fonts();
  CHECK_FALSE(rasterize_text(content_of({"a considerably long line of text"}), {}, fonts, 40, 20));
}

TEST_CASE("three lines stack top to bottom without overlap") {
  const FontLibrary fonts = testing::test_fonts();
  const auto tex = rasterize_text(content_of({"ONE", "TWO", "THREE"}), {}, fonts, 300, 200);
  REQUIRE(tex);
  REQUIRE(tex->words.size() == 3);
  for (int k = 0; k < 3; ++k) CHECK(tex->words[k].line == k);
  CHECK(tex->words[0].box.y1 <= tex->words[1].box.y0);
  CHECK(tex->words[1].box.y1 <= tex->words[2].box.y0);
}

TEST_CASE("character cells tile each word box") {
  const FontLibrary fonts = testing::test_fonts();
  const auto tex = rasterize_text(content_of({"Waveform kiosk", "GAMMA 42"}), {}, fonts, 420, 160);
  REQUIRE(tex);
  for (const auto& w : tex->words) {
    REQUIRE(w.chars.size() == w.text.size());
    CHECK(w.chars.front().x0 == w.box.x0);
    CHECK(w.chars.back().x1 == w.box.x1);
    for (std::size_t k = 0; k < w.chars.size(); ++k) {
      const PixelBox& c = w.chars[k];
      CHECK(c.y0 == w.box.y0);
      CHECK(c.y1 == w.box.y1);
      CHECK(c.x1 >= c.x0);
      if (k + 1 < w.chars.size()) CHECK(c.x1 == w.chars[k + 1].x0);
      // Every visible character owns some ink within one pixel of its cell.
      int ink = 0;
      for (int y = c.y0; y < c.y1; ++y)
        for (int x = std::max(w.box.x0, c.x0 - 1); x < std::min(w.box.x1, c.x1 + 1); ++x) ink += alpha_at(*tex, x, y) > 0;
      CHECK(ink > 0);
    }
  }
}

TEST_CASE("all ink lies inside word boxes") {
  const FontLibrary fonts = testing::test_fonts();
  const Corpus corpus = Corpus::load(testing::data_dir() / "corpus.txt");
  Rng rng = make_rng(8);
  int textures = 0;
  for (int i = 0; i < 30; ++i) {
    const auto structure = static_cast<TextStructure>(i % 3);
    const auto tex = rasterize_text(sample_text(corpus, structure, rng), {0, 40, {10, 20, 30}}, fonts, 480, 240);
    if (!tex) continue;
    ++textures;
    long long ink = 0, inside = 0;
    for (int y = 0; y < tex->rgba.height; ++y)
      for (int x = 0; x < tex->rgba.width; ++x) {
        if (alpha_at(*tex, x, y) == 0) continue;
        ++ink;
        inside += std::any_of(tex->words.begin(), tex->words.end(), [&](const WordLayout& w) {
          return x >= w.box.x0 && x < w.box.x1 && y >= w.box.y0 && y < w.box.y1;
        });
      }
    CHECK(ink > 0);
    CHECK(static_cast<double>(inside) >= 0.99 * static_cast<double>(ink));
  }
  CHECK(textures >= 20);
}

TEST_CASE("lab conversion matches reference values") {
  const Eigen::Vector3d white = srgb_to_lab({255, 255, 255});
  CHECK(white.x() == doctest::Approx(100.0).epsilon(1e-3));
  CHECK(std::abs(white.y()) < 0.05);
  CHECK(std::abs(white.z()) < 0.05);
  CHECK(srgb_to_lab({0, 0, 0}).norm() < 1e-9);
  // sRGB red under D65: L* 53.24, a* 80.09, b* 67.20.
  const Eigen::Vector3d red = srgb_to_lab({255, 0, 0});
  CHECK(red.x() == doctest::Approx(53.24).epsilon(2e-3));
  CHECK(red.y() == doctest::Approx(80.09).epsilon(2e-3));
  CHECK(red.z() == doctest::Approx(67.20).epsilon(2e-3));
}

TEST_CASE("text color contrasts with its background") {
  Rng rng = make_rng(12);
  const auto lab = [](const Rgb8& c) { return srgb_to_lab({double(c[0]), double(c[1]), double(c[2])}); };
  for (int i = 0; i < 50; ++i) {
    CHECK(lab(pick_text_color(RgbImage(8, 8, 255), rng)).x() <= 55.0);
    CHECK(lab(pick_text_color(RgbImage(8, 8, 0), rng)).x() >= 45.0);
  }
  std::uniform_int_distribution<int> byte(0, 255);
  for (int i = 0; i < 10000; ++i) {
    RgbImage crop(4, 4);
    const int base[3] = {byte(rng), byte(rng), byte(rng)};
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (int p = 0; p < 16; ++p)
      for (int c = 0; c < 3; ++c) {
        crop.data[p * 3 + c] = static_cast<std::uint8_t>(std::clamp(base[c] + byte(rng) / 8 - 16, 0, 255));
        mean[c] += crop.data[p * 3 + c] / 16.0;
      }
    const Rgb8 color = pick_text_color(crop, rng);
    CHECK(delta_e(srgb_to_lab(mean), lab(color)) >= kMinTextContrast);
  }
}
