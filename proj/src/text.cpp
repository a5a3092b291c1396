#include "scenetext/text.hpp"

#include <opencv2/core.hpp>
#include <opencv2/freetype.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>

#include "scenetext/errors.hpp"

namespace scenetext {

namespace fs = std::filesystem;

const char* to_string(TextStructure s) {
  switch (s) {
    case TextStructure::word: return "word";
    case TextStructure::lines: return "lines";
    case TextStructure::paragraph: return "paragraph";
  }
  return "word";
}

// ---------------------------------------------------------------------------------------
// Corpus and content sampling

namespace {

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join(const std::vector<std::string>& words, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out += ' ';
    out += words[i];
  }
  return out;
}

void fill_words(TextContent& content) {
  content.words.clear();
  for (std::size_t l = 0; l < content.lines.size(); ++l)
    for (const auto& w : split_ws(content.lines[l])) {
      bool replaced = false;
      std::string clean = sanitize_text(w, &replaced);
      content.words.push_back({std::move(clean), static_cast<int>(l), replaced});
    }
  for (auto& line : content.lines) line = sanitize_text(line);
}

}  // namespace

std::string sanitize_text(std::string_view utf8, bool* replaced) {
  std::string out;
  bool any = false;
  for (std::size_t i = 0; i < utf8.size();) {
    const auto c = static_cast<unsigned char>(utf8[i]);
    std::size_t len = 1;
    if (c >= 0xF0) len = 4;
    else if (c >= 0xE0) len = 3;
    else if (c >= 0xC0) len = 2;
    if (c >= 0x20 && c < 0x7F) {
      out += static_cast<char>(c);
    } else {
      out += '?';
      any = true;
    }
    i += len;
  }
  if (replaced) *replaced = any;
  return out;
}

Corpus Corpus::from_text(std::string_view text) {
  Corpus corpus;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto words = split_ws(text.substr(start, end - start));
    if (!words.empty()) {
      corpus.lines.push_back(join(words, 0, words.size()));
      corpus.tokens.insert(corpus.tokens.end(), words.begin(), words.end());
    }
    start = end + 1;
  }
  if (corpus.tokens.empty()) throw ConfigError("corpus is empty");
  return corpus;
}

Corpus Corpus::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read corpus: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

TextContent sample_text(const Corpus& corpus, TextStructure structure, Rng& rng) {
  if (corpus.tokens.empty() || corpus.lines.empty()) throw ConfigError("corpus is empty");
  TextContent content;
  content.structure = structure;
  switch (structure) {
    case TextStructure::word: {
      content.lines.push_back(corpus.tokens[uniform_int(rng, 0, static_cast<int>(corpus.tokens.size()) - 1)]);
      break;
    }
    case TextStructure::lines: {
      const int available = static_cast<int>(corpus.lines.size());
      const int n = std::min(uniform_int(rng, 1, kMaxLines), available);
      const int first = uniform_int(rng, 0, available - n);
      for (int i = 0; i < n; ++i) {
        const auto words = split_ws(corpus.lines[first + i]);
        content.lines.push_back(join(words, 0, std::min<std::size_t>(words.size(), kMaxWordsPerLine)));
      }
      break;
    }
    case TextStructure::paragraph: {
      const int total = static_cast<int>(corpus.tokens.size());
      const int count = std::min(uniform_int(rng, 8, 30), total);
      const int first = uniform_int(rng, 0, total - count);
      const int target_chars = uniform_int(rng, 12, 28);
      std::string line;
      for (int i = first; i < first + count; ++i) {
        const std::string& tok = corpus.tokens[i];
        if (!line.empty() && static_cast<int>(line.size() + 1 + tok.size()) > target_chars) {
          content.lines.push_back(line);
          line.clear();
          if (static_cast<int>(content.lines.size()) == kMaxParagraphLines) break;
        }
        if (!line.empty()) line += ' ';
        line += tok;
      }
      if (!line.empty() && static_cast<int>(content.lines.size()) < kMaxParagraphLines)
        content.lines.push_back(line);
      break;
    }
  }
  fill_words(content);
  return content;
}

// ---------------------------------------------------------------------------------------
// Fonts

struct FontLibrary::Impl {
  struct Font {
    std::string name;
    cv::Ptr<cv::freetype::FreeType2> face;
    std::unique_ptr<std::mutex> mutex;
  };
  std::vector<Font> fonts;
};

struct FontAccess {
  static FontLibrary::Impl& impl(const FontLibrary& lib) { return *lib.impl_; }
};

FontLibrary::FontLibrary() : impl_(std::make_unique<Impl>()) {}
FontLibrary::~FontLibrary() = default;
FontLibrary::FontLibrary(FontLibrary&&) noexcept = default;
FontLibrary& FontLibrary::operator=(FontLibrary&&) noexcept = default;

void FontLibrary::add_font(const fs::path& file) {
  Impl::Font font;
  font.name = file.filename().string();
  font.face = cv::freetype::createFreeType2();
  try {
    font.face->loadFontData(file.string(), 0);
  } catch (const cv::Exception& e) {
    throw ConfigError("cannot load font " + file.string() + ": " + e.what());
  }
  font.mutex = std::make_unique<std::mutex>();
  impl_->fonts.push_back(std::move(font));
}

FontLibrary FontLibrary::load_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("font directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".ttf" || ext == ".otf") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("no .ttf/.otf fonts in " + dir.string());
  FontLibrary lib;
  for (const auto& f : files) lib.add_font(f);
  return lib;
}

std::size_t FontLibrary::size() const { return impl_->fonts.size(); }
std::string FontLibrary::name(std::size_t font) const { return impl_->fonts.at(font).name; }

// ---------------------------------------------------------------------------------------
// Rasterization

namespace {

struct Ink {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool empty = true;
};

Ink ink_bounds(const cv::Mat& gray) {
  Ink ink;
  for (int y = 0; y < gray.rows; ++y) {
    const auto* row = gray.ptr<std::uint8_t>(y);
    for (int x = 0; x < gray.cols; ++x) {
      if (!row[x]) continue;
      if (ink.empty) {
        ink = {x, y, x + 1, y + 1, false};
      } else {
        ink.x0 = std::min(ink.x0, x);
        ink.x1 = std::max(ink.x1, x + 1);
        ink.y0 = std::min(ink.y0, y);
        ink.y1 = std::max(ink.y1, y + 1);
      }
    }
  }
  return ink;
}

// Renders `text` white-on-black and returns the single-channel coverage.
void render_gray(cv::freetype::FreeType2& face, const std::string& text, int glyph_height,
                 cv::Point baseline, cv::Mat& bgr_scratch, cv::Mat& gray) {
  bgr_scratch.setTo(cv::Scalar::all(0));
  face.putText(bgr_scratch, text, baseline, glyph_height, cv::Scalar::all(255), -1, cv::LINE_AA, true);
  cv::extractChannel(bgr_scratch, gray, 0);
}

struct PlacedWordLayout {
  std::size_t word;
  int line;
  int x;  // pen origin
  int width;
};

}  // namespace

std::optional<TextTexture> rasterize_text(const TextContent& content, const TextStyle& style,
                                          const FontLibrary& fonts, int width, int height) {
  auto& impl = FontAccess::impl(fonts);
  if (style.font >= impl.fonts.size()) throw ConfigError("font id out of range");
  if (content.words.empty() || width <= 2 * kTextMargin || height <= 2 * kTextMargin)
    return std::nullopt;
  auto& font = impl.fonts[style.font];
  std::lock_guard lock(*font.mutex);
  cv::freetype::FreeType2& face = *font.face;

  const int avail_w = width - 2 * kTextMargin;
  const int avail_h = height - 2 * kTextMargin;
  int gh = std::min(style.glyph_height, avail_h);

  while (gh >= kMinGlyphHeight) {
    const int next_gh = gh - std::max(1, gh / 12);
    const int line_h = static_cast<int>(std::ceil(kLineSpacing * gh));
    const int space = std::max(1, static_cast<int>(std::lround(0.33 * gh)));
    const int slack = static_cast<int>(std::ceil(0.08 * gh)) + 1;

    std::vector<int> widths;
    for (const auto& w : content.words) {
      int baseline = 0;
      widths.push_back(face.getTextSize(w.text, gh, -1, &baseline).width + slack);
    }

    // Assign words to lines and pen x-offsets (relative to the line start).
    std::vector<PlacedWordLayout> placed;
    std::vector<int> line_widths;
    bool fits = true;
    if (content.structure == TextStructure::paragraph) {
      int line = 0, x = 0;
      line_widths.push_back(0);
      for (std::size_t i = 0; i < content.words.size(); ++i) {
        if (widths[i] > avail_w) {
          fits = false;
          break;
        }
        if (x > 0 && x + space + widths[i] > avail_w) {
          ++line;
          x = 0;
          line_widths.push_back(0);
        }
        if (x > 0) x += space;
        placed.push_back({i, line, x, widths[i]});
        x += widths[i];
        line_widths.back() = x;
      }
      if (static_cast<int>(line_widths.size()) > kMaxParagraphLines) fits = false;
    } else {
      line_widths.assign(content.lines.size(), 0);
      for (std::size_t i = 0; i < content.words.size(); ++i) {
        const int line = content.words[i].line;
        int& x = line_widths[line];
        if (x > 0) x += space;
        placed.push_back({i, line, x, widths[i]});
        x += widths[i];
      }
      for (int lw : line_widths)
        if (lw > avail_w) fits = false;
    }
    const int n_lines = static_cast<int>(line_widths.size());
    if (!fits || n_lines * line_h > avail_h) {
      gh = next_gh;
      continue;
    }

    TextTexture tex;
    tex.rgba = RgbaImage(width, height, 0);
    tex.glyph_height = gh;
    tex.font = style.font;
    tex.color = style.color;
    cv::Mat alpha(height, width, CV_8UC1, cv::Scalar(0));

    const int block_top = kTextMargin + (avail_h - n_lines * line_h) / 2;
    const int ascent = static_cast<int>(std::lround(0.8 * gh));
    const int pad = gh;
    bool clipped = false;
    for (const auto& p : placed) {
      const auto& word = content.words[p.word];
      const int line_x0 = content.structure == TextStructure::paragraph
                              ? kTextMargin
                              : kTextMargin + (avail_w - line_widths[p.line]) / 2;
      const int pen_x = line_x0 + p.x;
      const int baseline_y = block_top + p.line * line_h + ascent;

      // Render in a local scratch with `pad` pixels of room around the pen origin.
      cv::Mat scratch(line_h + 2 * pad, p.width + 2 * pad, CV_8UC3);
      cv::Mat gray;
      const cv::Point origin(pad, pad + ascent);
      render_gray(face, word.text, gh, origin, scratch, gray);
      const Ink ink = ink_bounds(gray);
      if (ink.empty) {
        clipped = true;
        break;
      }
      const int dx = pen_x - origin.x, dy = baseline_y - origin.y;
      if (ink.x0 + dx < 0 || ink.y0 + dy < 0 || ink.x1 + dx > width || ink.y1 + dy > height) {
        clipped = true;
        break;
      }
      for (int y = ink.y0; y < ink.y1; ++y)
        for (int x = ink.x0; x < ink.x1; ++x) {
          auto& a = alpha.at<std::uint8_t>(y + dy, x + dx);
          a = std::max(a, gray.at<std::uint8_t>(y, x));
        }

      WordLayout layout;
      layout.text = word.text;
      layout.replaced = word.replaced;
      layout.line = p.line;
      layout.box = {ink.x0 + dx, ink.y0 + dy, ink.x1 + dx, ink.y1 + dy};
      // Character cells: ink right edges of successive prefixes split the word box.
      int left = layout.box.x0;
      for (std::size_t k = 1; k <= word.text.size(); ++k) {
        int right = layout.box.x1;
        if (k < word.text.size()) {
          render_gray(face, word.text.substr(0, k), gh, origin, scratch, gray);
          const Ink prefix = ink_bounds(gray);
          right = prefix.empty ? left : std::clamp(prefix.x1 + dx, left, layout.box.x1);
        }
        layout.chars.push_back({left, layout.box.y0, right, layout.box.y1});
        left = right;
      }
      tex.words.push_back(std::move(layout));
    }
    if (clipped) {
      gh = next_gh;
      continue;
    }

    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        const int a = alpha.at<std::uint8_t>(y, x);
        std::uint8_t* px = tex.rgba.at(x, y);
        for (int k = 0; k < 3; ++k) px[k] = static_cast<std::uint8_t>((style.color[k] * a + 127) / 255);
        px[3] = static_cast<std::uint8_t>(a);
      }
    return tex;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------------------
// Color

namespace {

constexpr double kWhiteX = 0.95047, kWhiteY = 1.0, kWhiteZ = 1.08883;

double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double c) {
  c = std::clamp(c, 0.0, 1.0);
  return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

Rgb8 lab_to_srgb8(double L, double a, double b) {
  const double fy = (L + 16.0) / 116.0, fx = fy + a / 500.0, fz = fy - b / 200.0;
  const auto finv = [](double t) { return t * t * t > 0.008856 ? t * t * t : (t - 16.0 / 116.0) / 7.787; };
  const double X = kWhiteX * finv(fx), Y = kWhiteY * finv(fy), Z = kWhiteZ * finv(fz);
  const double r = 3.2404542 * X - 1.5371385 * Y - 0.4985314 * Z;
  const double g = -0.9692660 * X + 1.8760108 * Y + 0.0415560 * Z;
  const double bl = 0.0556434 * X - 0.2040259 * Y + 1.0572252 * Z;
  const auto to8 = [](double c) { return static_cast<std::uint8_t>(std::lround(linear_to_srgb(c) * 255.0)); };
  return {to8(r), to8(g), to8(bl)};
}

std::vector<Rgb8> build_palette() {
  std::vector<Rgb8> palette;
  constexpr double kChroma = 25.0;
  for (double L : {8.0, 20.0, 32.0, 44.0, 56.0, 68.0, 80.0, 92.0})
    for (int h = 0; h < 8; ++h) {
      const double angle = h * std::numbers::pi / 4.0;
      palette.push_back(lab_to_srgb8(L, kChroma * std::cos(angle), kChroma * std::sin(angle)));
    }
  return palette;
}

}  // namespace

Eigen::Vector3d srgb_to_lab(const Eigen::Vector3d& rgb255) {
  const Eigen::Vector3d lin = (rgb255 / 255.0).unaryExpr(&srgb_to_linear);
  Eigen::Matrix3d m;
  m << 0.4124564, 0.3575761, 0.1804375, 0.2126729, 0.7151522, 0.0721750, 0.0193339, 0.1191920,
      0.9503041;
  const Eigen::Vector3d xyz = (m * lin).cwiseQuotient(Eigen::Vector3d(kWhiteX, kWhiteY, kWhiteZ));
  const auto f = [](double t) { return t > 0.008856 ? std::cbrt(t) : 7.787 * t + 16.0 / 116.0; };
  const double fx = f(xyz.x()), fy = f(xyz.y()), fz = f(xyz.z());
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

double delta_e(const Eigen::Vector3d& lab1, const Eigen::Vector3d& lab2) { return (lab1 - lab2).norm(); }

const std::vector<Rgb8>& text_palette() {
  static const std::vector<Rgb8> palette = build_palette();
  return palette;
}

Rgb8 pick_text_color(const RgbImage& crop, Rng& rng) {
  if (crop.empty()) throw DomainError("empty background crop");
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  const std::size_t n = static_cast<std::size_t>(crop.width) * crop.height;
  for (std::size_t i = 0; i < n; ++i)
    sum += Eigen::Vector3d(crop.data[3 * i], crop.data[3 * i + 1], crop.data[3 * i + 2]);
  const Eigen::Vector3d mean_lab = srgb_to_lab(sum / static_cast<double>(n));

  const auto& palette = text_palette();
  std::vector<double> de(palette.size());
  for (std::size_t i = 0; i < palette.size(); ++i)
    de[i] = delta_e(mean_lab, srgb_to_lab(Eigen::Vector3d(palette[i][0], palette[i][1], palette[i][2])));
  std::vector<std::size_t> order(palette.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return de[a] > de[b]; });
  return palette[order[uniform_int(rng, 0, kPaletteCandidates - 1)]];
}

RgbImage crop_image(const RgbImage& image, int x1, int y1, int x2, int y2) {
  x1 = std::clamp(x1, 0, image.width);
  x2 = std::clamp(x2, x1, image.width);
  y1 = std::clamp(y1, 0, image.height);
  y2 = std::clamp(y2, y1, image.height);
  RgbImage out(x2 - x1, y2 - y1);
  for (int y = y1; y < y2; ++y)
    std::copy(image.at(x1, y), image.at(x1, y) + 3 * (x2 - x1), out.at(0, y - y1));
  return out;
}

}  // namespace scenetext
