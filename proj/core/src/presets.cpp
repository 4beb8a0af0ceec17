#include "handik/presets.hpp"

#include <numbers>

namespace handik::presets {

namespace {

Joint make_joint(std::string name, const Eigen::Vector3d& origin_xyz, const Eigen::Vector3d& axis,
                 double limit_min, double limit_max) {
  Joint j;
  j.name = std::move(name);
  j.origin = Eigen::Isometry3d::Identity();
  j.origin.translation() = origin_xyz;
  j.axis = axis;
  j.limit_min_rad = limit_min;
  j.limit_max_rad = limit_max;
  j.damping = 0.001;
  return j;
}

}  // namespace

KinematicChain so101_chain() {
  std::vector<Joint> joints;
  joints.push_back(make_joint("shoulder_pan", {0.0, 0.0, 0.0563}, {0, 0, 1}, -1.920, 1.920));
  joints.push_back(make_joint("shoulder_lift", {0.0, 0.0, 0.0363}, {0, 1, 0}, -1.745, 1.745));
  joints.push_back(make_joint("elbow_flex", {0.0, 0.0, 0.1400}, {0, 1, 0}, -1.745, 1.571));
  joints.push_back(make_joint("wrist_flex", {0.0, 0.0, 0.1300}, {0, 1, 0}, -1.658, 1.658));
  joints.push_back(make_joint("wrist_roll", {0.0, 0.0, 0.0609}, {0, 0, 1}, -2.793, 2.793));
  // Jaw pivot; the tool centre point sits on this axis so jaw motion never
  // displaces the end-effector position.
  joints.push_back(make_joint("gripper", {0.0, 0.0, 0.0400}, {0, 1, 0}, -0.175, 1.745));
  return KinematicChain(std::move(joints), Eigen::Isometry3d::Identity());
}

CalibrationTransform egocentric_calibration() {
  const double theta = 50.0 * std::numbers::pi / 180.0;
  return CalibrationTransform::from_mount_angle(theta, {0.04, -0.049, 0.48});
}

CameraIntrinsics vga_intrinsics() {
  CameraIntrinsics k;
  k.fx = 600.0;
  k.fy = 600.0;
  k.cx = 320.0;
  k.cy = 240.0;
  k.width = 640;
  k.height = 480;
  k.depth_scale = 1000.0;
  return k;
}

GripperParams default_gripper() { return GripperParams{}; }

KinematicChain chain_preset(const std::string& name) {
  if (name == "so101") return so101_chain();
  throw ConfigError("unknown chain preset '" + name + "' (available: so101)");
}

CalibrationTransform calibration_preset(const std::string& name) {
  if (name == "egocentric") return egocentric_calibration();
  throw ConfigError("unknown calibration preset '" + name + "' (available: egocentric)");
}

std::vector<std::string> chain_preset_names() { return {"so101"}; }
std::vector<std::string> calibration_preset_names() { return {"egocentric"}; }

}  // namespace handik::presets
