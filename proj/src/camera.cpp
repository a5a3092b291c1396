#include "scenetext/camera.hpp"

#include <numbers>

namespace scenetext {

void CameraIntrinsics::validate() const {
  if (!(fx > 0 && fy > 0)) throw ValidationError("focal lengths must be positive");
  if (width <= 0 || height <= 0) throw DomainError("zero-area image");
  if (!(cx >= 0 && cx < width && cy >= 0 && cy < height))
    throw ValidationError("principal point outside the image");
}

CameraPose CameraPose::from_euler(const Vec3& position, double yaw_deg, double pitch_deg,
                                  double roll_deg) {
  constexpr double kDeg = std::numbers::pi / 180.0;
  // Camera (+x right, +y down, +z forward) to a level world camera looking down -z.
  const Eigen::Quaterniond base(Eigen::AngleAxisd(std::numbers::pi, Vec3::UnitX()));
  const Eigen::Quaterniond q = Eigen::AngleAxisd(yaw_deg * kDeg, Vec3::UnitY()) *
                               Eigen::AngleAxisd(pitch_deg * kDeg, Vec3::UnitX()) *
                               Eigen::AngleAxisd(roll_deg * kDeg, Vec3::UnitZ()) * base;
  return {position, q.normalized()};
}

std::optional<PixelDepth> project(const Vec3& point, const CameraIntrinsics& intrinsics,
                                  const CameraPose& pose) {
  const Vec3 p = pose.to_camera(point);
  if (p.z() <= 0.0) return std::nullopt;
  return PixelDepth{Vec2(intrinsics.fx * p.x() / p.z() + intrinsics.cx,
                         intrinsics.fy * p.y() / p.z() + intrinsics.cy),
                    p.z()};
}

Vec3 unproject(const Vec2& pixel, double depth, const CameraIntrinsics& intrinsics,
               const CameraPose& pose) {
  if (!(depth > 0.0)) throw DomainError("unproject requires positive depth");
  const Vec3 camera = depth * (intrinsics.back_projection() * pixel.homogeneous());
  return pose.to_world(camera);
}

Ray3 pixel_ray(const Vec2& pixel, const CameraIntrinsics& intrinsics, const CameraPose& pose) {
  const Vec3 dir = intrinsics.back_projection() * pixel.homogeneous();
  return {pose.position, (pose.orientation * dir).normalized()};
}

}  // namespace scenetext
