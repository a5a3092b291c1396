#pragma once

#include <optional>

#include "scenetext/geometry.hpp"

namespace scenetext {

/// Pinhole intrinsics in pixels. Pixel coordinates are continuous: pixel (i, j) covers
/// [i, i+1) x [j, j+1) and its center is (i + 0.5, j + 0.5).
struct CameraIntrinsics {
  double fx = 1000.0;
  double fy = 1000.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  static CameraIntrinsics with_defaults(int width, int height) {
    return {1000.0, 1000.0, width / 2.0, height / 2.0, width, height};
  }

  Eigen::Matrix3d matrix() const {
    Eigen::Matrix3d k;
    k << fx, 0, cx, 0, fy, cy, 0, 0, 1;
    return k;
  }

  /// Inverse of matrix(): maps homogeneous pixels to camera-space rays with unit z.
  Eigen::Matrix3d back_projection() const {
    Eigen::Matrix3d b;
    b << 1.0 / fx, 0, -cx / fx, 0, 1.0 / fy, -cy / fy, 0, 0, 1;
    return b;
  }

  void validate() const;
};

/// Camera frame: +x right, +y down, +z forward (right-handed). World frame is y-up.
/// `orientation` rotates camera-frame vectors into the world frame.
struct CameraPose {
  Vec3 position = Vec3::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();

  /// Yaw about world +y, then pitch about the yawed horizontal axis, then roll about the
  /// viewing axis; degrees. Zero angles look along world -z with world +y up in the image.
  static CameraPose from_euler(const Vec3& position, double yaw_deg, double pitch_deg,
                               double roll_deg);

  Eigen::Matrix3d rotation() const { return orientation.toRotationMatrix(); }
  Vec3 right() const { return orientation * Vec3::UnitX(); }
  Vec3 down() const { return orientation * Vec3::UnitY(); }
  Vec3 forward() const { return orientation * Vec3::UnitZ(); }

  Vec3 to_camera(const Vec3& world) const { return orientation.conjugate() * (world - position); }
  Vec3 to_world(const Vec3& camera) const { return orientation * camera + position; }
};

struct PixelDepth {
  Vec2 pixel;
  double depth;  // camera-space z
};

/// Forward pinhole projection; nullopt for points at or behind the camera plane.
std::optional<PixelDepth> project(const Vec3& point, const CameraIntrinsics& intrinsics,
                                  const CameraPose& pose);

/// World point at camera-space depth `depth` through `pixel`. Throws DomainError if depth <= 0.
Vec3 unproject(const Vec2& pixel, double depth, const CameraIntrinsics& intrinsics,
               const CameraPose& pose);

/// Primary ray from the camera center through `pixel`.
Ray3 pixel_ray(const Vec2& pixel, const CameraIntrinsics& intrinsics, const CameraPose& pose);

}  // namespace scenetext
