#pragma once

#include "handik/commands.hpp"
#include "handik/geometry.hpp"
#include "handik/gripper.hpp"
#include "handik/hand.hpp"
#include "handik/io.hpp"
#include "handik/kinematics.hpp"
#include "handik/retarget.hpp"

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace handik {

struct NonFinite : Error {
  using Error::Error;
};

/// A named pipeline stage wrapping a transform with automatic wall-clock
/// latency tracking: every call records one sample in microseconds.
template <typename In, typename Out>
class Transformation {
 public:
  explicit Transformation(std::string name) : name_(std::move(name)) {}
  virtual ~Transformation() = default;

  Out operator()(const In& in) {
    const auto start = std::chrono::steady_clock::now();
    Out out = transform(in);
    const auto stop = std::chrono::steady_clock::now();
    samples_us_.push_back(std::chrono::duration<double, std::micro>(stop - start).count());
    return out;
  }

  const std::string& name() const { return name_; }
  StageReport report() const { return {name_, samples_us_}; }

 protected:
  virtual Out transform(const In& in) = 0;

 private:
  std::string name_;
  std::vector<double> samples_us_;
};

/// Stream-processing parameters; every field has the standard default.
struct PipelineOptions {
  double alpha_2d = 0.8;
  double alpha_joints = 0.5;
  IkParams ik{};
  GripperParams gripper{};
  Handedness handedness = Handedness::Right;
  double z_floor_m = 0.05;
};

/// File-backed pipeline configuration: where to find the chain and the
/// calibration (a named preset or an explicit file, never both) plus the
/// stream options. Resolved into a Pipeline by Pipeline::from_config.
struct PipelineConfig {
  std::filesystem::path chain_path;
  std::string chain_preset;
  std::filesystem::path calibration_path;
  std::string calibration_preset;
  PipelineOptions options{};

  void validate() const;  // throws ConfigError on ambiguous sources
};

struct ProcessResult {
  std::vector<JointCommand> trajectory;
  std::vector<StageReport> stages;
  /// Reconstructed target per frame before IK; absent when the frame never
  /// reached target construction. Diagnostic only, not serialized.
  std::vector<std::optional<TargetPose>> targets;

  std::size_t count(CommandStatus s) const;
};

/// Normalizes joint angles against the chain limits, clamped to [0, 1], and
/// maps them to hardware scales: arm motor = (n - 0.5) * 200, gripper motor
/// = n * 100. Throws NonFinite on non-finite angles and LengthMismatch
/// unless exactly five arm angles are given for a 6-joint chain.
struct NormalizedCommand {
  std::array<double, 6> normalized{};
  std::array<double, 6> motor{};
};
NormalizedCommand normalize_and_map(const Eigen::VectorXd& arm_angles, double gripper_angle,
                                    const KinematicChain& chain);

/// Converts recorded landmark + depth streams into joint commands.
///
/// Per frame: 2D smoothing, depth deprojection with the half-valid
/// acceptance rule and the knuckle depth rescue, the calibration transform,
/// target pose construction with the wrist fallback, the z-floor safety
/// check, damped-least-squares IK seeded at the previously emitted
/// configuration, joint-space smoothing, gripper fallback and mode, and the
/// motor mapping. Frames that fail validity, safety or pose construction
/// re-emit the previous command as HeldLastValid (or a Rejected placeholder
/// when nothing was emitted yet); the stream never aborts on a bad frame.
class Pipeline {
 public:
  Pipeline(KinematicChain chain, CalibrationTransform calibration, PipelineOptions options = {});

  /// Loads chain + calibration named by the config. Throws ConfigError.
  static Pipeline from_config(const PipelineConfig& config);

  ProcessResult process_stream(const RecordingBundle& recording);

  const KinematicChain& chain() const { return chain_; }
  const PipelineOptions& options() const { return options_; }

 private:
  KinematicChain chain_;
  CalibrationTransform calibration_;
  PipelineOptions options_;
};

/// Human-readable per-stage latency table plus the per-frame total.
std::string latency_report(const std::vector<StageReport>& stages);

}  // namespace handik
