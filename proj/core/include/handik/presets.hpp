#pragma once

#include "handik/geometry.hpp"
#include "handik/gripper.hpp"
#include "handik/kinematics.hpp"

#include <string>
#include <vector>

namespace handik::presets {

/// Bundled 6-joint serial arm (5 arm joints + 1 gripper jaw) modelled after
/// the SO-ARM101 low-cost manipulator. Joint names, ordering, angle limits
/// and joint count match the hardware; link lengths are approximate and not
/// calibrated against the physical arm.
KinematicChain so101_chain();

/// Head-mounted camera rig: 50 degree downward tilt, camera offset
/// (0.04, -0.049, 0.48) m from the robot base, no extra model offset.
CalibrationTransform egocentric_calibration();

/// 640x480 depth camera with nominal VGA focal lengths and millimetre depth.
CameraIntrinsics vga_intrinsics();

GripperParams default_gripper();

/// Named lookups used by config files and CLI flags. Throw ConfigError for
/// unknown names.
KinematicChain chain_preset(const std::string& name);
CalibrationTransform calibration_preset(const std::string& name);
std::vector<std::string> chain_preset_names();
std::vector<std::string> calibration_preset_names();

}  // namespace handik::presets
