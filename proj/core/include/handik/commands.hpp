#pragma once

#include <array>
#include <string>
#include <vector>

namespace handik {

enum class CommandStatus { Solved, HeldLastValid, Rejected };

const char* command_status_name(CommandStatus s);
CommandStatus parse_command_status(const std::string& s);  // throws FormatError

/// One emitted robot command: five arm joint angles plus the gripper angle,
/// their normalized [0,1] positions against the joint ranges, and the
/// hardware-scale motor values (arm in [-100,100], gripper in [0,100]).
struct JointCommand {
  double timestamp_s = 0.0;
  std::array<double, 5> arm_angles_rad{};
  double gripper_angle_rad = 0.0;
  std::array<double, 6> normalized{};
  std::array<double, 6> motor{};
  CommandStatus status = CommandStatus::Rejected;
  std::string reject_reason;  ///< set when status == Rejected
  int gripper_level = 0;      ///< 1..4 fallback level, 0 before any solve
  int ik_iterations = 0;
  double ik_residual = 0.0;
};

struct LatencySummary {
  double mean_us = 0.0;
  double p50_us = 0.0;
  double p95_us = 0.0;
  double max_us = 0.0;
};

/// Wall-clock samples for one pipeline stage, one sample per frame that
/// entered the stage.
struct StageReport {
  std::string stage;
  std::vector<double> samples_us;

  LatencySummary summary() const;
};

}  // namespace handik
