#include "handik/pipeline.hpp"

#include "handik/presets.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace handik {

namespace {

double percentile(std::vector<double> sorted, double p) {
  if (sorted.empty()) return 0.0;
  const auto rank = static_cast<std::size_t>(
      std::ceil(p / 100.0 * static_cast<double>(sorted.size())));
  return sorted[std::min(sorted.size() - 1, rank == 0 ? 0 : rank - 1)];
}

}  // namespace

LatencySummary StageReport::summary() const {
  LatencySummary s;
  if (samples_us.empty()) return s;
  s.mean_us = std::accumulate(samples_us.begin(), samples_us.end(), 0.0) /
              static_cast<double>(samples_us.size());
  std::vector<double> sorted = samples_us;
  std::sort(sorted.begin(), sorted.end());
  s.p50_us = percentile(sorted, 50.0);
  s.p95_us = percentile(sorted, 95.0);
  s.max_us = sorted.back();
  return s;
}

void PipelineConfig::validate() const {
  const bool file = !chain_path.empty();
  const bool preset = !chain_preset.empty();
  if (file == preset) {
    throw ConfigError("config: exactly one of chain_path / chain_preset is required");
  }
  const bool cal_file = !calibration_path.empty();
  const bool cal_preset = !calibration_preset.empty();
  if (cal_file == cal_preset) {
    throw ConfigError("config: exactly one of calibration_path / calibration_preset is required");
  }
}

std::size_t ProcessResult::count(CommandStatus s) const {
  return static_cast<std::size_t>(
      std::count_if(trajectory.begin(), trajectory.end(),
                    [s](const JointCommand& c) { return c.status == s; }));
}

NormalizedCommand normalize_and_map(const Eigen::VectorXd& arm_angles, double gripper_angle,
                                    const KinematicChain& chain) {
  if (chain.dof() != 6 || arm_angles.size() != 5) {
    throw LengthMismatch("normalize_and_map expects 5 arm angles and a 6-joint chain");
  }
  NormalizedCommand out;
  for (std::size_t i = 0; i < 6; ++i) {
    const double angle = i < 5 ? arm_angles[static_cast<Eigen::Index>(i)] : gripper_angle;
    if (!std::isfinite(angle)) {
      throw NonFinite("normalize_and_map: joint " + chain.joint(i).name + " is not finite");
    }
    const Joint& j = chain.joint(i);
    const double norm =
        std::clamp((angle - j.limit_min_rad) / (j.limit_max_rad - j.limit_min_rad), 0.0, 1.0);
    out.normalized[i] = norm;
    out.motor[i] = i < 5 ? (norm - 0.5) * 200.0 : norm * 100.0;
  }
  return out;
}

Pipeline::Pipeline(KinematicChain chain, CalibrationTransform calibration, PipelineOptions options)
    : chain_(std::move(chain)), calibration_(std::move(calibration)),
      options_(std::move(options)) {
  if (chain_.dof() != 6) {
    throw ConfigError("pipeline: expected a 6-joint chain (5 arm + gripper), got " +
                      std::to_string(chain_.dof()));
  }
  options_.ik.validate();
  options_.gripper.validate();
  if (!(options_.alpha_2d > 0.0 && options_.alpha_2d <= 1.0) ||
      !(options_.alpha_joints > 0.0 && options_.alpha_joints <= 1.0)) {
    throw ConfigError("pipeline: smoothing alphas must lie in (0, 1]");
  }
}

Pipeline Pipeline::from_config(const PipelineConfig& config) {
  config.validate();
  KinematicChain chain = config.chain_path.empty() ? presets::chain_preset(config.chain_preset)
                                                   : load_chain(config.chain_path);
  CalibrationTransform calibration = config.calibration_path.empty()
                                         ? presets::calibration_preset(config.calibration_preset)
                                         : load_calibration(config.calibration_path);
  return Pipeline(std::move(chain), std::move(calibration), config.options);
}

namespace {

// Stage payloads. The five stages mirror the capture-to-command order of the
// live system; early-exit frames skip the stages they never reach.

struct DeprojectInput {
  const LandmarkFrame* landmarks;
  const DepthFrame* depth;
};

struct DeprojectOutput {
  std::array<std::optional<Point3>, kLandmarkCount> camera_points;
  int valid_count = 0;
  FrameAcceptance acceptance = FrameAcceptance::Reject;
};

struct SolveInput {
  const HandPoints3D* hand;
  double timestamp_s;
};

struct SolveOutput {
  JointCommand command;
  std::optional<TargetPose> target;
  std::string failure;  ///< empty on success; otherwise why the frame failed
};

struct InputStage final : Transformation<std::size_t, RecordingBundle::FramePair> {
  explicit InputStage(const RecordingBundle& rec)
      : Transformation("recording_input"), rec_(rec) {}
  RecordingBundle::FramePair transform(const std::size_t& index) override {
    return rec_.frame(index);
  }
  const RecordingBundle& rec_;
};

struct SmoothStage final : Transformation<LandmarkFrame, LandmarkFrame> {
  explicit SmoothStage(double alpha) : Transformation("landmark_smoothing"), smoother_(alpha) {}
  LandmarkFrame transform(const LandmarkFrame& raw) override { return smoother_.smooth(raw); }
  SmoothingState2D smoother_;
};

struct DeprojectStage final : Transformation<DeprojectInput, DeprojectOutput> {
  explicit DeprojectStage(const CameraIntrinsics& k)
      : Transformation("depth_deprojection"), k_(k) {}
  DeprojectOutput transform(const DeprojectInput& in) override {
    DeprojectOutput out;
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
      if (!in.landmarks->pixel_valid[i]) continue;
      const Eigen::Vector2d& px = in.landmarks->pixels[i];
      if (px.x() < -0.5 || px.x() > in.depth->width - 0.5 || px.y() < -0.5 ||
          px.y() > in.depth->height - 0.5) {
        continue;  // off-raster landmark counts as invalid, not an error
      }
      out.camera_points[i] = deproject(px.x(), px.y(), *in.depth, k_);
    }
    out.valid_count = static_cast<int>(
        std::count_if(out.camera_points.begin(), out.camera_points.end(),
                      [](const auto& p) { return p.has_value(); }));
    out.acceptance = frame_acceptance(out.valid_count);
    if (out.acceptance == FrameAcceptance::Accept) {
      out.camera_points = gripper_depth_fallback(out.camera_points, *in.landmarks, k_);
    }
    return out;
  }
  const CameraIntrinsics& k_;
};

struct TransformStage final
    : Transformation<std::array<std::optional<Point3>, kLandmarkCount>, HandPoints3D> {
  explicit TransformStage(const CalibrationTransform& c)
      : Transformation("coordinate_transform"), c_(c) {}
  HandPoints3D transform(const std::array<std::optional<Point3>, kLandmarkCount>& in) override {
    HandPoints3D out;
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
      if (in[i]) out.points[i] = camera_to_robot(*in[i], c_);
    }
    return out;
  }
  const CalibrationTransform& c_;
};

/// Target construction, safety, IK, joint smoothing, gripper and motor
/// mapping. Owns the cross-frame solver state.
struct SolveStage final : Transformation<SolveInput, SolveOutput> {
  SolveStage(const KinematicChain& chain, const PipelineOptions& opts)
      : Transformation("ik_gripper"), chain_(chain), opts_(opts), rest_(chain.mid_range()) {}

  SolveOutput transform(const SolveInput& in) override {
    SolveOutput out;
    out.command.timestamp_s = in.timestamp_s;

    TargetPose target;
    try {
      target = build_target_pose(*in.hand);
    } catch (const MissingLandmarks&) {
      out.failure = "missing target landmarks";
      return out;
    } catch (const DegenerateGeometry&) {
      out.failure = "degenerate hand geometry";
      return out;
    }
    out.target = target;

    if (safety_check(target, opts_.z_floor_m) == SafetyCheck::Rejected) {
      out.failure = "target below z floor";
      return out;
    }

    const IkResult ik = solve_ik(chain_, target, rest_, opts_.ik);

    GripperDecision grip;
    try {
      grip = gripper_with_fallback(*in.hand, target.position, gripper_state_, opts_.gripper);
    } catch (const DegenerateVectors&) {
      out.failure = "degenerate gripper vectors";
      return out;
    }
    const double gripper_out = apply_gripper_mode(grip.angle_rad, opts_.gripper);

    Eigen::VectorXd arm = ik.q.head<5>();
    arm = ema_smooth_joints(arm_prev_, arm, opts_.alpha_joints);
    for (Eigen::Index i = 0; i < 5; ++i) {
      const Joint& j = chain_.joint(static_cast<std::size_t>(i));
      arm[i] = std::clamp(arm[i], j.limit_min_rad, j.limit_max_rad);
    }

    const NormalizedCommand mapped = normalize_and_map(arm, gripper_out, chain_);

    JointCommand& cmd = out.command;
    for (std::size_t i = 0; i < 5; ++i) cmd.arm_angles_rad[i] = arm[static_cast<Eigen::Index>(i)];
    cmd.gripper_angle_rad = gripper_out;
    cmd.normalized = mapped.normalized;
    cmd.motor = mapped.motor;
    cmd.status = CommandStatus::Solved;
    cmd.gripper_level = grip.level;
    cmd.ik_iterations = ik.report.iterations;
    cmd.ik_residual = ik.report.final_residual;

    arm_prev_ = arm;
    rest_.head<5>() = arm;
    rest_[5] = gripper_out;
    return out;
  }

  const KinematicChain& chain_;
  const PipelineOptions& opts_;
  Eigen::VectorXd rest_;
  std::optional<Eigen::VectorXd> arm_prev_;
  GripperState gripper_state_;
};

JointCommand placeholder_command(double timestamp_s, const std::string& reason,
                                 const KinematicChain& chain) {
  JointCommand cmd;
  cmd.timestamp_s = timestamp_s;
  cmd.status = CommandStatus::Rejected;
  cmd.reject_reason = reason;
  const NormalizedCommand mapped = normalize_and_map(Eigen::VectorXd::Zero(5), 0.0, chain);
  cmd.normalized = mapped.normalized;
  cmd.motor = mapped.motor;
  return cmd;
}

}  // namespace

ProcessResult Pipeline::process_stream(const RecordingBundle& recording) {
  ProcessResult result;
  result.trajectory.reserve(recording.frame_count());
  result.targets.resize(recording.frame_count());

  InputStage input(recording);
  SmoothStage smooth(options_.alpha_2d);
  DeprojectStage deproject_stage(recording.intrinsics());
  TransformStage to_robot(calibration_);
  SolveStage solve(chain_, options_);

  std::optional<JointCommand> last_valid;

  auto emit_failure = [&](double timestamp_s, const std::string& reason) {
    if (last_valid) {
      JointCommand held = *last_valid;
      held.timestamp_s = timestamp_s;
      held.status = CommandStatus::HeldLastValid;
      result.trajectory.push_back(std::move(held));
    } else {
      result.trajectory.push_back(placeholder_command(timestamp_s, reason, chain_));
    }
  };

  for (std::size_t f = 0; f < recording.frame_count(); ++f) {
    const RecordingBundle::FramePair pair = input(f);
    const double timestamp_s = pair.landmarks.timestamp_s;

    if (pair.landmarks.handedness != options_.handedness) {
      emit_failure(timestamp_s, "wrong handedness");
      continue;
    }

    const LandmarkFrame smoothed = smooth(pair.landmarks);
    const DeprojectOutput depth_out = deproject_stage({&smoothed, &pair.depth});
    if (depth_out.acceptance == FrameAcceptance::Reject) {
      emit_failure(timestamp_s, "too few valid landmarks");
      continue;
    }

    const HandPoints3D hand = to_robot(depth_out.camera_points);
    SolveOutput solved = solve({&hand, timestamp_s});
    result.targets[f] = solved.target;
    if (!solved.failure.empty()) {
      emit_failure(timestamp_s, solved.failure);
      continue;
    }

    last_valid = solved.command;
    result.trajectory.push_back(std::move(solved.command));
  }

  result.stages = {input.report(), smooth.report(), deproject_stage.report(), to_robot.report(),
                   solve.report()};
  return result;
}

std::string latency_report(const std::vector<StageReport>& stages) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1);
  out << std::left << std::setw(22) << "stage" << std::right << std::setw(8) << "frames"
      << std::setw(12) << "mean_us" << std::setw(12) << "p50_us" << std::setw(12) << "p95_us"
      << std::setw(12) << "max_us" << "\n";
  double total_mean = 0.0;
  for (const StageReport& s : stages) {
    const LatencySummary sum = s.summary();
    total_mean += sum.mean_us;
    out << std::left << std::setw(22) << s.stage << std::right << std::setw(8)
        << s.samples_us.size() << std::setw(12) << sum.mean_us << std::setw(12) << sum.p50_us
        << std::setw(12) << sum.p95_us << std::setw(12) << sum.max_us << "\n";
  }
  out << std::left << std::setw(22) << "total (per frame)" << std::right << std::setw(8) << ""
      << std::setw(12) << total_mean << "\n";
  return out.str();
}

}  // namespace handik
