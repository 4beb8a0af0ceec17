#pragma once

#include "handik/hand.hpp"
#include "handik/types.hpp"

#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace handik {

struct NonPositiveDepth : Error {
  using Error::Error;
};

struct OutOfBounds : Error {
  using Error::Error;
};

/// Pinhole camera parameters. Focal lengths and principal point in pixels.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;
  double depth_scale = 1000.0;  ///< raw depth units per metre

  void validate() const;  // throws ConfigError
};

/// A 16-bit depth raster. Raw values are depth_scale units per metre
/// (millimetres at the default scale of 1000); a raw value of 0 is a sensor
/// no-return and always invalid.
struct DepthFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> raster;  ///< row-major, raster[v * width + u]
  double scale = 1000.0;
  double min_depth_m = 0.1;
  double max_depth_m = 5.0;

  std::uint16_t at(int u, int v) const { return raster[static_cast<std::size_t>(v) * width + u]; }
  std::uint16_t& at(int u, int v) { return raster[static_cast<std::size_t>(v) * width + u]; }
};

/// Projects a camera-frame point to pixel coordinates:
/// u = fx*X/Z + cx, v = fy*Y/Z + cy.
/// Throws NonPositiveDepth for points at or behind the image plane and
/// FrameMismatch for points not tagged Camera.
Eigen::Vector2d project(const Point3& p, const CameraIntrinsics& k);

/// Continuous-ray deprojection at a known metric depth (no raster lookup):
/// ((u-cx)/fx * Z, (v-cy)/fy * Z, Z). Throws NonPositiveDepth for Z <= 0.
Point3 deproject_ray(double u, double v, double depth_m, const CameraIntrinsics& k);

/// Deprojects pixel (u, v) through the depth raster. The raster is sampled
/// at the nearest integer pixel (clamped at the half-pixel border); the ray
/// itself uses the continuous coordinates. Returns nullopt when the sampled
/// depth is a no-return or falls outside [min_depth_m, max_depth_m]. Throws
/// OutOfBounds when (u, v) lies outside the raster.
std::optional<Point3> deproject(double u, double v, const DepthFrame& d,
                                const CameraIntrinsics& k);

/// Rotation of the camera mount for a tilt angle theta:
///   [ -1    0          0      ]
///   [  0    sin(t)   -cos(t)  ]
///   [  0   -cos(t)   -sin(t)  ]
/// The x negation mirrors the image horizontally (the camera faces the
/// operator); the tilt maps the downward view onto the robot's forward-up
/// axes. Orthonormal with determinant +1 for every theta.
Eigen::Matrix3d build_camera_rotation(double theta_rad);

/// Rigid camera-to-robot map composed of the camera extrinsics and an
/// optional robot-model offset:
///   R_final = R_urdf * R_cam,  t_final = R_urdf * t_cam + t_urdf.
class CalibrationTransform {
 public:
  /// Throws ConfigError unless both rotations are orthonormal with
  /// determinant +1 within 1e-9.
  CalibrationTransform(const Eigen::Matrix3d& R_cam, const Eigen::Vector3d& t_cam,
                       const Eigen::Matrix3d& R_urdf = Eigen::Matrix3d::Identity(),
                       const Eigen::Vector3d& t_urdf = Eigen::Vector3d::Zero());

  /// Builds R_cam from the mount angle via build_camera_rotation.
  static CalibrationTransform from_mount_angle(
      double theta_rad, const Eigen::Vector3d& t_cam,
      const Eigen::Matrix3d& R_urdf = Eigen::Matrix3d::Identity(),
      const Eigen::Vector3d& t_urdf = Eigen::Vector3d::Zero());

  const Eigen::Matrix3d& rotation() const { return R_final_; }
  const Eigen::Vector3d& translation() const { return t_final_; }

  const Eigen::Matrix3d& camera_rotation() const { return R_cam_; }
  const Eigen::Vector3d& camera_translation() const { return t_cam_; }
  const Eigen::Matrix3d& urdf_rotation() const { return R_urdf_; }
  const Eigen::Vector3d& urdf_translation() const { return t_urdf_; }
  std::optional<double> mount_angle_rad() const { return theta_rad_; }

  /// Robot-frame point back to the camera frame (exact rigid inverse).
  Point3 robot_to_camera(const Point3& p) const;

 private:
  Eigen::Matrix3d R_cam_, R_urdf_, R_final_;
  Eigen::Vector3d t_cam_, t_urdf_, t_final_;
  std::optional<double> theta_rad_;
};

/// Applies the calibration map R_final * p + t_final. Throws FrameMismatch
/// unless p is tagged Camera; the result is tagged Robot.
Point3 camera_to_robot(const Point3& p, const CalibrationTransform& c);

/// Depth rescue for the two gripper-defining knuckles. When exactly one of
/// {ThumbMcp, IndexFingerMcp} lost its depth while the other kept it, the
/// lost one is rebuilt by pushing its own pixel ray out to the neighbour's
/// depth (adjacent knuckles sit at nearly the same distance). Everything
/// else passes through unchanged. Inputs are camera-frame points.
std::array<std::optional<Point3>, kLandmarkCount> gripper_depth_fallback(
    std::array<std::optional<Point3>, kLandmarkCount> points, const LandmarkFrame& pixels,
    const CameraIntrinsics& k);

}  // namespace handik
