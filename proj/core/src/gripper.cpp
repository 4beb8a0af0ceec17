#include "handik/gripper.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numbers>

namespace handik {

namespace {
constexpr double kZeroVectorTol = 1e-9;
}

GripperMode GripperMode::parse(const std::string& text) {
  if (text == "normal") return {GripperModeKind::Normal, 0.0};
  if (text == "binary") return {GripperModeKind::Binary, 0.0};
  if (text.rfind("offset:", 0) == 0) {
    const std::string value = text.substr(7);
    try {
      std::size_t used = 0;
      const double off = std::stod(value, &used);
      if (used == value.size()) return {GripperModeKind::Offset, off};
    } catch (const std::exception&) {
    }
    throw ConfigError("gripper mode: bad offset value '" + value + "'");
  }
  throw ConfigError("gripper mode: expected normal | binary | offset:<rad>, got '" + text + "'");
}

std::string GripperMode::to_string() const {
  switch (kind) {
    case GripperModeKind::Normal:
      return "normal";
    case GripperModeKind::Binary:
      return "binary";
    case GripperModeKind::Offset:
      return "offset:" + std::to_string(offset_rad);
  }
  return "normal";
}

void GripperParams::validate() const {
  if (!(phi_min_rad < phi_max_rad)) {
    throw ConfigError("gripper: phi_min must be below phi_max");
  }
  if (!(binary_threshold_rad > phi_min_rad && binary_threshold_rad < phi_max_rad)) {
    throw ConfigError("gripper: binary threshold outside (phi_min, phi_max)");
  }
}

double gripper_angle(const Point3& thumb, const Point3& index, const Point3& target,
                     const GripperParams& params) {
  assert(thumb.frame == target.frame && index.frame == target.frame);
  const Eigen::Vector3d a = thumb.xyz - target.xyz;
  const Eigen::Vector3d b = index.xyz - target.xyz;
  const double na = a.norm();
  const double nb = b.norm();
  if (na < kZeroVectorTol || nb < kZeroVectorTol) {
    throw DegenerateVectors("gripper vectors collapse onto the base point");
  }
  const double cosine = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
  double phi = std::acos(cosine);
  phi = std::min(phi, std::numbers::pi / 2.0);  // acute range
  phi += params.calibration_offset_rad;
  return std::clamp(phi, params.phi_min_rad, params.phi_max_rad);
}

GripperDecision gripper_with_fallback(const HandPoints3D& h, const Point3& target,
                                      GripperState& state, const GripperParams& params) {
  const auto& thumb_tip = h[LandmarkId::ThumbTip];
  const auto& index_tip = h[LandmarkId::IndexFingerTip];
  if (thumb_tip && index_tip) {
    const double angle = gripper_angle(*thumb_tip, *index_tip, target, params);
    state.last_valid_angle_rad = angle;
    state.level_used = 1;
    return {angle, 1};
  }

  const auto& thumb_ip = h[LandmarkId::ThumbIp];
  const auto& index_dip = h[LandmarkId::IndexFingerDip];
  if (thumb_ip && index_dip) {
    const double angle = gripper_angle(*thumb_ip, *index_dip, target, params);
    state.last_valid_angle_rad = angle;
    state.level_used = 2;
    return {angle, 2};
  }

  if (state.last_valid_angle_rad) {
    state.level_used = 3;
    return {*state.last_valid_angle_rad, 3};
  }

  state.level_used = 4;
  return {0.5 * (params.phi_min_rad + params.phi_max_rad), 4};
}

double apply_gripper_mode(double phi_rad, const GripperParams& params) {
  switch (params.mode.kind) {
    case GripperModeKind::Normal:
      return phi_rad;
    case GripperModeKind::Binary:
      return phi_rad >= params.binary_threshold_rad ? params.phi_max_rad : params.phi_min_rad;
    case GripperModeKind::Offset:
      return std::clamp(phi_rad + params.mode.offset_rad, params.phi_min_rad, params.phi_max_rad);
  }
  return phi_rad;
}

}  // namespace handik
