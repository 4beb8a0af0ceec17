#include "handik/geometry.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <sstream>

namespace handik {

namespace {

constexpr double kRotationTol = 1e-9;

bool is_proper_rotation(const Eigen::Matrix3d& R, double tol) {
  const double ortho = (R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return ortho < tol && std::abs(R.determinant() - 1.0) < tol;
}

}  // namespace

void CameraIntrinsics::validate() const {
  std::ostringstream err;
  if (!(fx > 0.0) || !(fy > 0.0)) {
    err << "focal lengths must be positive (fx=" << fx << ", fy=" << fy << ")";
  } else if (width <= 0 || height <= 0) {
    err << "image size must be positive (" << width << "x" << height << ")";
  } else if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
    err << "principal point (" << cx << ", " << cy << ") outside " << width << "x" << height;
  } else if (!(depth_scale > 0.0)) {
    err << "depth_scale must be positive, got " << depth_scale;
  } else {
    return;
  }
  throw ConfigError("intrinsics: " + err.str());
}

Eigen::Vector2d project(const Point3& p, const CameraIntrinsics& k) {
  if (p.frame != Frame::Camera) {
    throw FrameMismatch("project expects a camera-frame point");
  }
  if (!(p.z() > 0.0)) {
    throw NonPositiveDepth("cannot project point with Z = " + std::to_string(p.z()));
  }
  return {k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy};
}

Point3 deproject_ray(double u, double v, double depth_m, const CameraIntrinsics& k) {
  if (!(depth_m > 0.0)) {
    throw NonPositiveDepth("ray depth must be positive, got " + std::to_string(depth_m));
  }
  return camera_point((u - k.cx) / k.fx * depth_m, (v - k.cy) / k.fy * depth_m, depth_m);
}

std::optional<Point3> deproject(double u, double v, const DepthFrame& d,
                                const CameraIntrinsics& k) {
  if (u < -0.5 || u > d.width - 0.5 || v < -0.5 || v > d.height - 0.5) {
    std::ostringstream msg;
    msg << "pixel (" << u << ", " << v << ") outside " << d.width << "x" << d.height << " raster";
    throw OutOfBounds(msg.str());
  }
  const int ui = std::clamp(static_cast<int>(std::lround(u)), 0, d.width - 1);
  const int vi = std::clamp(static_cast<int>(std::lround(v)), 0, d.height - 1);
  const std::uint16_t raw = d.at(ui, vi);
  if (raw == 0) return std::nullopt;  // sensor no-return
  const double z = raw / d.scale;
  if (z < d.min_depth_m || z > d.max_depth_m) return std::nullopt;
  return deproject_ray(u, v, z, k);
}

Eigen::Matrix3d build_camera_rotation(double theta_rad) {
  const double s = std::sin(theta_rad);
  const double c = std::cos(theta_rad);
  Eigen::Matrix3d r;
  r << -1.0, 0.0, 0.0,  //
      0.0, s, -c,       //
      0.0, -c, -s;
  return r;
}

CalibrationTransform::CalibrationTransform(const Eigen::Matrix3d& R_cam,
                                           const Eigen::Vector3d& t_cam,
                                           const Eigen::Matrix3d& R_urdf,
                                           const Eigen::Vector3d& t_urdf)
    : R_cam_(R_cam), R_urdf_(R_urdf), t_cam_(t_cam), t_urdf_(t_urdf) {
  if (!is_proper_rotation(R_cam_, kRotationTol)) {
    throw ConfigError("calibration: R_cam is not a proper rotation");
  }
  if (!is_proper_rotation(R_urdf_, kRotationTol)) {
    throw ConfigError("calibration: R_urdf is not a proper rotation");
  }
  R_final_ = R_urdf_ * R_cam_;
  t_final_ = R_urdf_ * t_cam_ + t_urdf_;
}

CalibrationTransform CalibrationTransform::from_mount_angle(double theta_rad,
                                                            const Eigen::Vector3d& t_cam,
                                                            const Eigen::Matrix3d& R_urdf,
                                                            const Eigen::Vector3d& t_urdf) {
  CalibrationTransform c(build_camera_rotation(theta_rad), t_cam, R_urdf, t_urdf);
  c.theta_rad_ = theta_rad;
  return c;
}

Point3 CalibrationTransform::robot_to_camera(const Point3& p) const {
  if (p.frame != Frame::Robot) {
    throw FrameMismatch("robot_to_camera expects a robot-frame point");
  }
  return camera_point(R_final_.transpose() * (p.xyz - t_final_));
}

Point3 camera_to_robot(const Point3& p, const CalibrationTransform& c) {
  if (p.frame != Frame::Camera) {
    throw FrameMismatch("camera_to_robot expects a camera-frame point");
  }
  return robot_point(c.rotation() * p.xyz + c.translation());
}

std::array<std::optional<Point3>, kLandmarkCount> gripper_depth_fallback(
    std::array<std::optional<Point3>, kLandmarkCount> points, const LandmarkFrame& pixels,
    const CameraIntrinsics& k) {
  const std::size_t thumb = index_of(LandmarkId::ThumbMcp);
  const std::size_t index = index_of(LandmarkId::IndexFingerMcp);

  const bool thumb_ok = points[thumb].has_value();
  const bool index_ok = points[index].has_value();
  if (thumb_ok == index_ok) return points;  // both valid or both lost: nothing to do

  const std::size_t lost = thumb_ok ? index : thumb;
  const std::size_t donor = thumb_ok ? thumb : index;
  if (!pixels.pixel_valid[lost]) return points;  // no pixel ray to rebuild along

  assert(points[donor]->frame == Frame::Camera);
  const double donor_z = points[donor]->z();
  points[lost] = deproject_ray(pixels.pixels[lost].x(), pixels.pixels[lost].y(), donor_z, k);
  return points;
}

}  // namespace handik
