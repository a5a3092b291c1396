#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace scenetext {

/// Dense H x W scalar raster, row-major so that (y, x) indexing matches image memory order.
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Interleaved 8-bit image.
template <int Channels>
struct ByteImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  ByteImage() = default;
  ByteImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h * Channels, fill) {}

  static constexpr int channels = Channels;

  std::uint8_t* at(int x, int y) {
    return data.data() + (static_cast<std::size_t>(y) * width + x) * Channels;
  }
  const std::uint8_t* at(int x, int y) const {
    return data.data() + (static_cast<std::size_t>(y) * width + x) * Channels;
  }
  bool empty() const { return width == 0 || height == 0; }
  bool operator==(const ByteImage&) const = default;
};

using RgbImage = ByteImage<3>;
using RgbaImage = ByteImage<4>;

// PNG I/O. Channel order on disk is standard RGB(A).
void write_png(const std::filesystem::path& path, const RgbImage& image);
void write_png(const std::filesystem::path& path, const RgbaImage& image);
void write_png_gray8(const std::filesystem::path& path, const Plane<std::uint8_t>& plane);
void write_png_gray16(const std::filesystem::path& path, const Plane<std::uint16_t>& plane);
std::vector<std::uint8_t> encode_png(const RgbImage& image);
RgbImage read_png_rgb(const std::filesystem::path& path);

}  // namespace scenetext
