#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace handik {

/// Coordinate frame a 3D quantity is expressed in.
enum class Frame { Camera, Robot };

inline const char* frame_name(Frame f) { return f == Frame::Camera ? "Camera" : "Robot"; }

/// A 3D point in metres, tagged with its coordinate frame. The tag travels
/// with the point through every transform so that frame-mixing bugs surface
/// as errors instead of silently wrong numbers.
struct Point3 {
  Eigen::Vector3d xyz = Eigen::Vector3d::Zero();
  Frame frame = Frame::Camera;

  double x() const { return xyz.x(); }
  double y() const { return xyz.y(); }
  double z() const { return xyz.z(); }
};

inline Point3 camera_point(double x, double y, double z) { return {{x, y, z}, Frame::Camera}; }
inline Point3 camera_point(const Eigen::Vector3d& v) { return {v, Frame::Camera}; }
inline Point3 robot_point(double x, double y, double z) { return {{x, y, z}, Frame::Robot}; }
inline Point3 robot_point(const Eigen::Vector3d& v) { return {v, Frame::Robot}; }

/// Base class of all errors thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration (bad parameter, unknown preset).
struct ConfigError : Error {
  using Error::Error;
};

/// Malformed input data; messages carry file/line context where available.
struct FormatError : Error {
  using Error::Error;
};

/// A point tagged with one frame was passed where another is required.
struct FrameMismatch : Error {
  using Error::Error;
};

}  // namespace handik
