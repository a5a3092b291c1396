#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scenetext/image.hpp"
#include "scenetext/rng.hpp"

namespace scenetext {

enum class TextStructure { word, lines, paragraph };

const char* to_string(TextStructure s);

struct Corpus {
  std::vector<std::string> tokens;
  std::vector<std::string> lines;

  /// Splits UTF-8 text into non-empty trimmed lines and whitespace-free tokens.
  /// Throws ConfigError if no tokens remain.
  static Corpus from_text(std::string_view text);
  static Corpus load(const std::filesystem::path& path);
};

struct WordTruth {
  std::string text;
  int line = 0;
  bool replaced = false;  // contained characters outside the renderable set
};

struct TextContent {
  TextStructure structure = TextStructure::word;
  std::vector<std::string> lines;
  std::vector<WordTruth> words;
};

inline constexpr int kMaxLines = 3;
inline constexpr int kMaxParagraphLines = 8;
inline constexpr int kMaxWordsPerLine = 4;

/// Printable ASCII is renderable; every other code point becomes '?'.
std::string sanitize_text(std::string_view utf8, bool* replaced = nullptr);

TextContent sample_text(const Corpus& corpus, TextStructure structure, Rng& rng);

/// Set of TrueType/OpenType fonts. Rendering through one font is serialized internally.
class FontLibrary {
public:
  FontLibrary();
  ~FontLibrary();
  FontLibrary(FontLibrary&&) noexcept;
  FontLibrary& operator=(FontLibrary&&) noexcept;

  /// Loads every .ttf/.otf file in `dir`, sorted by file name.
  static FontLibrary load_dir(const std::filesystem::path& dir);
  void add_font(const std::filesystem::path& file);

  std::size_t size() const;
  std::string name(std::size_t font) const;

  struct Impl;

private:
  friend struct FontAccess;
  std::unique_ptr<Impl> impl_;
};

struct TextStyle {
  std::size_t font = 0;
  int glyph_height = 48;  // nominal (em) size in pixels; rasterization may shrink it
  std::array<std::uint8_t, 3> color{0, 0, 0};
};

inline constexpr int kMinGlyphHeight = 16;
inline constexpr int kTextMargin = 2;  // pixels on every side
inline constexpr double kLineSpacing = 1.2;

/// Axis-aligned box in texture pixels, [x0, x1) x [y0, y1).
struct PixelBox {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool empty() const { return x1 <= x0 || y1 <= y0; }
};

struct WordLayout {
  std::string text;
  bool replaced = false;
  int line = 0;
  PixelBox box;                 // tight bound of the word's ink
  std::vector<PixelBox> chars;  // one per character, tiling box horizontally
};

struct TextTexture {
  RgbaImage rgba;  // premultiplied
  std::vector<WordLayout> words;
  int glyph_height = 0;
  std::size_t font = 0;
  std::array<std::uint8_t, 3> color{};
};

/// Lays out and renders `content` into a width x height texture, shrinking the glyph size
/// from style.glyph_height down to kMinGlyphHeight until everything fits. nullopt means the
/// region is too small for the content.
std::optional<TextTexture> rasterize_text(const TextContent& content, const TextStyle& style,
                                          const FontLibrary& fonts, int width, int height);

// Color selection.
using Rgb8 = std::array<std::uint8_t, 3>;

/// CIELAB (D65) of an 8-bit sRGB color.
Eigen::Vector3d srgb_to_lab(const Eigen::Vector3d& rgb255);
double delta_e(const Eigen::Vector3d& lab1, const Eigen::Vector3d& lab2);

/// 64 entries: 8 lightness tiers x 8 hues at moderate chroma.
const std::vector<Rgb8>& text_palette();

inline constexpr double kMinTextContrast = 25.0;
inline constexpr int kPaletteCandidates = 8;

/// Uniform choice among the 8 palette entries farthest (CIE76) from the crop's mean color.
Rgb8 pick_text_color(const RgbImage& crop, Rng& rng);

RgbImage crop_image(const RgbImage& image, int x1, int y1, int x2, int y2);

}  // namespace scenetext
