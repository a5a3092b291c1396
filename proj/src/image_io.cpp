#include "scenetext/image.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "scenetext/errors.hpp"

namespace scenetext {

namespace {

template <int Channels>
cv::Mat to_bgr_mat(const ByteImage<Channels>& image) {
  cv::Mat rgb(image.height, image.width, CV_8UC(Channels),
              const_cast<std::uint8_t*>(image.data.data()));
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, Channels == 3 ? cv::COLOR_RGB2BGR : cv::COLOR_RGBA2BGRA);
  return bgr;
}

void write_mat(const std::filesystem::path& path, const cv::Mat& mat) {
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), mat);
  } catch (const cv::Exception&) {
    ok = false;
  }
  if (!ok) throw IoError("cannot write image: " + path.string());
}

}  // namespace

void write_png(const std::filesystem::path& path, const RgbImage& image) {
  write_mat(path, to_bgr_mat(image));
}

void write_png(const std::filesystem::path& path, const RgbaImage& image) {
  write_mat(path, to_bgr_mat(image));
}

void write_png_gray8(const std::filesystem::path& path, const Plane<std::uint8_t>& plane) {
  cv::Mat mat(static_cast<int>(plane.rows()), static_cast<int>(plane.cols()), CV_8UC1,
              const_cast<std::uint8_t*>(plane.data()));
  write_mat(path, mat);
}

void write_png_gray16(const std::filesystem::path& path, const Plane<std::uint16_t>& plane) {
  cv::Mat mat(static_cast<int>(plane.rows()), static_cast<int>(plane.cols()), CV_16UC1,
              const_cast<std::uint16_t*>(plane.data()));
  write_mat(path, mat);
}

std::vector<std::uint8_t> encode_png(const RgbImage& image) {
  std::vector<std::uint8_t> out;
  if (!cv::imencode(".png", to_bgr_mat(image), out)) throw IoError("png encoding failed");
  return out;
}

RgbImage read_png_rgb(const std::filesystem::path& path) {
  const cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw LoadError("cannot read image: " + path.string());
  RgbImage image(bgr.cols, bgr.rows);
  cv::Mat rgb(bgr.rows, bgr.cols, CV_8UC3, image.data.data());
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  return image;
}

}  // namespace scenetext
