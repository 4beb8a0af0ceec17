#pragma once

#include "handik/hand.hpp"
#include "handik/types.hpp"

#include <Eigen/Geometry>

#include <array>
#include <optional>
#include <utility>

namespace handik {

struct MissingLandmarks : Error {
  using Error::Error;
};

struct DegenerateGeometry : Error {
  using Error::Error;
};

/// Robot-frame hand landmarks. Absent entries failed detection or depth.
struct HandPoints3D {
  std::array<std::optional<Point3>, kLandmarkCount> points{};

  const std::optional<Point3>& operator[](LandmarkId id) const { return points[index_of(id)]; }
  std::optional<Point3>& operator[](LandmarkId id) { return points[index_of(id)]; }
};

enum class OrientationSource { Primary, WristFallback };

/// End-effector goal: robot-frame position plus a unit quaternion
/// (Hamilton convention, scalar first when serialized).
struct TargetPose {
  Point3 position = robot_point(0, 0, 0);
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
  OrientationSource orientation_source = OrientationSource::Primary;
};

/// Midpoint of the two gripper-defining knuckles (ThumbMcp, IndexFingerMcp).
/// Throws MissingLandmarks if either is absent.
Point3 target_position(const HandPoints3D& h);

/// Orientation from hand geometry. The gripper-opening axis e1 points from
/// the thumb knuckle to the index knuckle; the mean finger direction (or,
/// when a fingertip is missing, the wrist-to-gripper direction) spans the
/// approach plane; e3 = e1 x d_hat completes a right-handed frame with
/// e2 = e3 x e1, and R = [e1 e2 e3] is returned as a unit quaternion.
///
/// Throws MissingLandmarks when the knuckles (or, in fallback, the wrist)
/// are absent and DegenerateGeometry when the construction collapses
/// (coincident knuckles, cancelling finger vectors, e1 parallel to d_hat).
std::pair<Eigen::Quaterniond, OrientationSource> target_orientation(const HandPoints3D& h);

/// target_position + target_orientation in one record.
TargetPose build_target_pose(const HandPoints3D& h);

}  // namespace handik
