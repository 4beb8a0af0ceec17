#include "handik/retarget.hpp"

#include <cassert>
#include <cmath>

namespace handik {

namespace {

constexpr double kParallelTol = 1e-8;
constexpr double kCoincidentTol = 1e-9;

const Point3& require(const HandPoints3D& h, LandmarkId id, const char* what) {
  const auto& p = h[id];
  if (!p) throw MissingLandmarks(std::string("missing landmark for ") + what);
  assert(p->frame == Frame::Robot);
  return *p;
}

}  // namespace

Point3 target_position(const HandPoints3D& h) {
  const Point3& thumb = require(h, LandmarkId::ThumbMcp, "target position (ThumbMcp)");
  const Point3& index = require(h, LandmarkId::IndexFingerMcp, "target position (IndexFingerMcp)");
  return robot_point(0.5 * (thumb.xyz + index.xyz));
}

std::pair<Eigen::Quaterniond, OrientationSource> target_orientation(const HandPoints3D& h) {
  const Point3& thumb_mcp = require(h, LandmarkId::ThumbMcp, "orientation (ThumbMcp)");
  const Point3& index_mcp = require(h, LandmarkId::IndexFingerMcp, "orientation (IndexFingerMcp)");

  const Eigen::Vector3d e1_raw = index_mcp.xyz - thumb_mcp.xyz;
  if (e1_raw.norm() < kCoincidentTol) {
    throw DegenerateGeometry("gripper-defining knuckles coincide");
  }
  const Eigen::Vector3d e1 = e1_raw.normalized();

  Eigen::Vector3d d;
  OrientationSource source;
  const auto& thumb_tip = h[LandmarkId::ThumbTip];
  const auto& index_tip = h[LandmarkId::IndexFingerTip];
  if (thumb_tip && index_tip) {
    d = 0.5 * ((thumb_tip->xyz - thumb_mcp.xyz) + (index_tip->xyz - index_mcp.xyz));
    source = OrientationSource::Primary;
  } else {
    const Point3& wrist = require(h, LandmarkId::Wrist, "fallback orientation (Wrist)");
    d = 0.5 * (thumb_mcp.xyz + index_mcp.xyz) - wrist.xyz;
    source = OrientationSource::WristFallback;
  }
  if (d.norm() < kCoincidentTol) {
    throw DegenerateGeometry("finger direction vanished");
  }
  const Eigen::Vector3d d_hat = d.normalized();

  const Eigen::Vector3d cross = e1.cross(d_hat);
  if (cross.norm() < kParallelTol) {
    throw DegenerateGeometry("knuckle axis parallel to finger direction");
  }
  const Eigen::Vector3d e3 = cross.normalized();
  const Eigen::Vector3d e2 = e3.cross(e1);

  Eigen::Matrix3d rot;
  rot.col(0) = e1;
  rot.col(1) = e2;
  rot.col(2) = e3;

  Eigen::Quaterniond q(rot);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();  // canonical sign for stable serialization
  return {q, source};
}

TargetPose build_target_pose(const HandPoints3D& h) {
  TargetPose pose;
  pose.position = target_position(h);
  auto [q, source] = target_orientation(h);
  pose.orientation = q;
  pose.orientation_source = source;
  return pose;
}

}  // namespace handik
