#pragma once

#include "handik/commands.hpp"
#include "handik/geometry.hpp"
#include "handik/hand.hpp"
#include "handik/kinematics.hpp"
#include "handik/retarget.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace handik {

/// Landmark stream and depth frames disagree on length, or a referenced
/// frame file is missing.
struct AlignmentError : Error {
  using Error::Error;
};

/// A synthetic scenario leaves the camera frustum or the depth range.
struct Unreachable : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Config and data files. Exact layouts are documented in docs/formats.md.
// ---------------------------------------------------------------------------

CameraIntrinsics load_intrinsics(const std::filesystem::path& path);
void save_intrinsics(const std::filesystem::path& path, const CameraIntrinsics& k);

KinematicChain load_chain(const std::filesystem::path& path);
void save_chain(const std::filesystem::path& path, const KinematicChain& chain);

CalibrationTransform load_calibration(const std::filesystem::path& path);
void save_calibration(const std::filesystem::path& path, const CalibrationTransform& c);

std::vector<LandmarkFrame> load_landmark_stream(const std::filesystem::path& path);
void save_landmark_stream(const std::filesystem::path& path,
                          const std::vector<LandmarkFrame>& frames);

DepthFrame load_depth_frame(const std::filesystem::path& path);
void save_depth_frame(const std::filesystem::path& path, const DepthFrame& d);

std::vector<JointCommand> load_trajectory(const std::filesystem::path& path);
void save_trajectory(const std::filesystem::path& path, const std::vector<JointCommand>& commands);
std::string trajectory_to_string(const std::vector<JointCommand>& commands);

void save_latency_sidecar(const std::filesystem::path& path,
                          const std::vector<StageReport>& stages);

// ---------------------------------------------------------------------------
// Recordings
// ---------------------------------------------------------------------------

struct RecordingManifest {
  std::filesystem::path intrinsics;  ///< resolved relative to the manifest
  std::filesystem::path landmarks;
  std::filesystem::path depth_dir;
  std::string depth_pattern = "frame_%06d.depth16";
  std::size_t frame_count = 0;
  double fps = 30.0;
};

RecordingManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const RecordingManifest& m);

/// A frame-aligned recording: landmark stream, per-frame depth rasters and
/// the intrinsics they were captured with. Landmarks are held in memory;
/// depth rasters are read from disk per frame.
class RecordingBundle {
 public:
  /// Opens and cross-checks a recording. Throws FormatError on parse
  /// failures and AlignmentError when the landmark count disagrees with the
  /// manifest or a depth frame file is missing (named by index).
  static RecordingBundle open(const std::filesystem::path& manifest_path);

  std::size_t frame_count() const { return manifest_.frame_count; }
  double fps() const { return manifest_.fps; }
  const CameraIntrinsics& intrinsics() const { return intrinsics_; }
  const RecordingManifest& manifest() const { return manifest_; }

  struct FramePair {
    LandmarkFrame landmarks;
    DepthFrame depth;
  };
  FramePair frame(std::size_t index) const;

  std::filesystem::path depth_path(std::size_t index) const;

 private:
  RecordingBundle() = default;

  RecordingManifest manifest_;
  CameraIntrinsics intrinsics_;
  std::vector<LandmarkFrame> landmark_frames_;
};

// ---------------------------------------------------------------------------
// Synthetic recordings
// ---------------------------------------------------------------------------

enum class SynthScenario { StaticGrasp, LineSweep, GraspCycle };

SynthScenario parse_scenario(const std::string& name);  // throws ConfigError
const char* scenario_name(SynthScenario s);

struct SynthParams {
  SynthScenario scenario = SynthScenario::StaticGrasp;
  std::size_t frames = 300;
  double fps = 30.0;
  Handedness handedness = Handedness::Right;
  /// Gripper-centre path anchor in the robot frame; scenario motion is
  /// relative to it. The defaults place a natural downward pinch in the
  /// bundled camera view, well inside the bundled arm's dexterous volume.
  Eigen::Vector3d target_m{0.06, -0.30, 0.20};
  /// Knuckle-line direction (thumb -> index) and mean finger direction;
  /// normalized internally.
  Eigen::Vector3d knuckle_dir{-0.81, 0.53, 0.23};
  Eigen::Vector3d finger_dir{0.02, 0.42, -0.91};
  double knuckle_span_m = 0.08;  ///< distance between the two knuckles
  double finger_len_m = 0.09;    ///< knuckle-to-fingertip reach
  double open_half_angle_rad = 0.698;   ///< 40 deg: wide grip phase
  double closed_half_angle_rad = 0.262;  ///< 15 deg: pinch phase
  std::size_t cycle_frames = 60;  ///< grasp_cycle period
  double sweep_extent_m = 0.06;   ///< line_sweep total travel along knuckle_dir
  int depth_disk_radius_px = 6;   ///< painted hand-surface footprint
};

/// Per-frame ground truth captured while generating a synthetic recording.
struct SynthTruth {
  std::vector<TargetPose> targets;
  std::vector<double> tip_angle_rad;  ///< thumb-index separation at the base
};

struct SynthOutput {
  std::filesystem::path manifest_path;
  std::filesystem::path truth_path;
  SynthTruth truth;
};

/// Builds a plausible 21-landmark hand following the scenario in robot
/// space, back-projects it through the calibration inverse and the pinhole
/// model into pixel landmarks and depth rasters, and writes a loadable
/// recording plus the ground-truth sidecar. Throws Unreachable when any
/// landmark leaves the camera frustum or the valid depth range.
SynthOutput synth_recording(const SynthParams& params, const CalibrationTransform& calibration,
                            const CameraIntrinsics& intrinsics,
                            const std::filesystem::path& out_dir);

SynthTruth load_truth(const std::filesystem::path& path);
void save_truth(const std::filesystem::path& path, const SynthTruth& truth);

// ---------------------------------------------------------------------------
// Trajectory replay validation
// ---------------------------------------------------------------------------

/// Kinematic replay bounds. Velocity in rad/s, acceleration in rad/s^2,
/// split by servo category (arm joints vs gripper jaw).
struct ReplayLimits {
  double arm_velocity_rad_s = 8.0;
  double gripper_velocity_rad_s = 16.0;
  double arm_acceleration_rad_s2 = 300.0;
  double gripper_acceleration_rad_s2 = 600.0;
  double z_floor_m = 0.05;
};

enum class ReplayFlagKind { JointLimit, Velocity, Acceleration, ZFloor };

const char* replay_flag_name(ReplayFlagKind k);

struct ReplayFlag {
  std::size_t frame = 0;
  ReplayFlagKind kind = ReplayFlagKind::JointLimit;
  std::string joint;  ///< empty for z-floor flags
  double value = 0.0;
  double bound = 0.0;
};

struct ReplayReport {
  std::size_t frames = 0;
  std::vector<ReplayFlag> flags;
  /// End-effector position per frame; absent for Rejected placeholders.
  std::vector<std::optional<Eigen::Vector3d>> ee_positions;

  bool ok() const { return flags.empty(); }
};

/// Replays a trajectory through forward kinematics and flags joint-limit
/// violations, per-joint velocity/acceleration excesses (finite differences
/// at the given fps) and end-effector dips below the z floor. Rejected
/// placeholder rows carry no command and are skipped. fps must be positive.
ReplayReport fk_replay_validate(const std::vector<JointCommand>& trajectory,
                                const KinematicChain& chain, const ReplayLimits& limits,
                                double fps);

std::string replay_report_to_string(const ReplayReport& report);
void save_replay_report(const std::filesystem::path& path, const ReplayReport& report);

}  // namespace handik
