#pragma once

#include "handik/retarget.hpp"
#include "handik/types.hpp"

#include <optional>
#include <string>

namespace handik {

struct DegenerateVectors : Error {
  using Error::Error;
};

enum class GripperModeKind { Normal, Binary, Offset };

/// Deployment gripper mode: Normal passes the measured angle through,
/// Binary snaps it fully open or closed around a threshold, Offset shifts
/// it by a fixed amount for tighter grasps.
struct GripperMode {
  GripperModeKind kind = GripperModeKind::Normal;
  double offset_rad = 0.0;

  /// Parses "normal", "binary" or "offset:<rad>". Throws ConfigError.
  static GripperMode parse(const std::string& text);
  std::string to_string() const;
};

struct GripperParams {
  double phi_min_rad = 0.087;
  double phi_max_rad = 1.658;
  double calibration_offset_rad = -0.175;     ///< tightens the measured grip
  double binary_threshold_rad = 1.0471975511965976;  // 60 degrees
  GripperMode mode{};

  void validate() const;  // throws ConfigError
};

/// Per-stream gripper memory: the last angle measured from real landmarks
/// and, for diagnostics, which fallback level produced the last output.
struct GripperState {
  std::optional<double> last_valid_angle_rad;
  int level_used = 0;
};

/// Angular separation between the thumb and index vectors anchored at the
/// gripper base: arccos of their normalized dot product, clamped to the
/// acute range [0, pi/2], shifted by the calibration offset, then clamped
/// to [phi_min, phi_max]. Throws DegenerateVectors when either vector is
/// numerically zero.
double gripper_angle(const Point3& thumb, const Point3& index, const Point3& target,
                     const GripperParams& params);

struct GripperDecision {
  double angle_rad = 0.0;
  int level = 0;  ///< 1 fingertips, 2 knuckles, 3 held last value, 4 mid-open
};

/// Four-level fallback: fingertips, then ThumbIp/IndexFingerDip, then the
/// last valid angle, then the mid-open default. Levels 1-2 refresh
/// state.last_valid_angle_rad; levels 3-4 leave it untouched. Total: level 4
/// always yields a value.
GripperDecision gripper_with_fallback(const HandPoints3D& h, const Point3& target,
                                      GripperState& state, const GripperParams& params);

/// Applies the deployment mode to an in-range angle.
double apply_gripper_mode(double phi_rad, const GripperParams& params);

}  // namespace handik
