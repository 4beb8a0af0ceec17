#include "handik/io.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace handik {

namespace {

/// All 21 landmarks of one synthetic hand, robot frame.
struct SyntheticHand {
  std::array<Eigen::Vector3d, kLandmarkCount> points;
};

/// Places a plausible right hand: the two gripper knuckles straddle the
/// target along the knuckle line, thumb and index fingertips open
/// symmetrically by half_angle on each side of the finger direction, and
/// the remaining digits fill out a believable palm. The construction keeps
/// the mean fingertip direction exactly equal to finger_dir and the
/// thumb-index separation at the target exactly 2 * half_angle.
SyntheticHand build_hand(const Eigen::Vector3d& target, const Eigen::Vector3d& knuckle_dir,
                         const Eigen::Vector3d& finger_dir, double half_angle,
                         const SynthParams& p) {
  const Eigen::Vector3d e1 = knuckle_dir.normalized();
  const Eigen::Vector3d d = finger_dir.normalized();
  const double half_span = 0.5 * p.knuckle_span_m;
  const double len = p.finger_len_m;

  SyntheticHand hand;
  auto set = [&](LandmarkId id, const Eigen::Vector3d& v) { hand.points[index_of(id)] = v; };

  const Eigen::Vector3d thumb_mcp = target - half_span * e1;
  const Eigen::Vector3d index_mcp = target + half_span * e1;
  const Eigen::Vector3d thumb_tip =
      target + len * (std::cos(half_angle) * d - std::sin(half_angle) * e1);
  const Eigen::Vector3d index_tip =
      target + len * (std::cos(half_angle) * d + std::sin(half_angle) * e1);

  set(LandmarkId::Wrist, target - 0.09 * d);
  set(LandmarkId::ThumbCmc, thumb_mcp - 0.03 * e1 - 0.03 * d);
  set(LandmarkId::ThumbMcp, thumb_mcp);
  set(LandmarkId::ThumbIp, thumb_mcp + 0.55 * (thumb_tip - thumb_mcp));
  set(LandmarkId::ThumbTip, thumb_tip);
  set(LandmarkId::IndexFingerMcp, index_mcp);
  set(LandmarkId::IndexFingerPip, index_mcp + 0.35 * (index_tip - index_mcp));
  set(LandmarkId::IndexFingerDip, index_mcp + 0.72 * (index_tip - index_mcp));
  set(LandmarkId::IndexFingerTip, index_tip);

  const struct {
    LandmarkId mcp;
    double knuckle_offset;
    double length;
  } digits[] = {
      {LandmarkId::MiddleFingerMcp, 0.025, 0.075},
      {LandmarkId::RingFingerMcp, 0.050, 0.068},
      {LandmarkId::PinkyMcp, 0.075, 0.055},
  };
  for (const auto& digit : digits) {
    const Eigen::Vector3d mcp = index_mcp + digit.knuckle_offset * e1;
    const std::size_t base = index_of(digit.mcp);
    hand.points[base] = mcp;
    hand.points[base + 1] = mcp + 0.33 * digit.length * d;
    hand.points[base + 2] = mcp + 0.66 * digit.length * d;
    hand.points[base + 3] = mcp + digit.length * d;
  }
  return hand;
}

/// Ground-truth pose from the clean robot-space construction.
TargetPose truth_pose(const Eigen::Vector3d& target, const Eigen::Vector3d& knuckle_dir,
                      const Eigen::Vector3d& finger_dir) {
  const Eigen::Vector3d e1 = knuckle_dir.normalized();
  const Eigen::Vector3d d = finger_dir.normalized();
  const Eigen::Vector3d e3 = e1.cross(d).normalized();
  const Eigen::Vector3d e2 = e3.cross(e1);
  Eigen::Matrix3d rot;
  rot.col(0) = e1;
  rot.col(1) = e2;
  rot.col(2) = e3;
  TargetPose pose;
  pose.position = robot_point(target);
  pose.orientation = Eigen::Quaterniond(rot).normalized();
  if (pose.orientation.w() < 0.0) pose.orientation.coeffs() = -pose.orientation.coeffs();
  pose.orientation_source = OrientationSource::Primary;
  return pose;
}

void paint_disk(DepthFrame& depth, double u, double v, double z_m, int radius) {
  const int uc = static_cast<int>(std::lround(u));
  const int vc = static_cast<int>(std::lround(v));
  const auto raw = static_cast<std::uint16_t>(std::lround(z_m * depth.scale));
  for (int dv = -radius; dv <= radius; ++dv) {
    for (int du = -radius; du <= radius; ++du) {
      if (du * du + dv * dv > radius * radius) continue;
      const int uu = uc + du;
      const int vv = vc + dv;
      if (uu < 0 || uu >= depth.width || vv < 0 || vv >= depth.height) continue;
      depth.at(uu, vv) = raw;
    }
  }
}

}  // namespace

SynthScenario parse_scenario(const std::string& name) {
  if (name == "static_grasp") return SynthScenario::StaticGrasp;
  if (name == "line_sweep") return SynthScenario::LineSweep;
  if (name == "grasp_cycle") return SynthScenario::GraspCycle;
  throw ConfigError("unknown scenario '" + name +
                    "' (available: static_grasp, line_sweep, grasp_cycle)");
}

const char* scenario_name(SynthScenario s) {
  switch (s) {
    case SynthScenario::StaticGrasp:
      return "static_grasp";
    case SynthScenario::LineSweep:
      return "line_sweep";
    case SynthScenario::GraspCycle:
      return "grasp_cycle";
  }
  return "static_grasp";
}

SynthOutput synth_recording(const SynthParams& params, const CalibrationTransform& calibration,
                            const CameraIntrinsics& intrinsics,
                            const std::filesystem::path& out_dir) {
  intrinsics.validate();
  if (params.frames == 0) throw ConfigError("synth: frame count must be positive");
  if (!(params.fps > 0.0)) throw ConfigError("synth: fps must be positive");

  std::filesystem::create_directories(out_dir);
  const auto depth_dir = out_dir / "depth";
  std::filesystem::create_directories(depth_dir);

  std::vector<LandmarkFrame> stream;
  stream.reserve(params.frames);
  SynthTruth truth;

  const int margin = params.depth_disk_radius_px;

  for (std::size_t f = 0; f < params.frames; ++f) {
    Eigen::Vector3d target = params.target_m;
    double half_angle = params.open_half_angle_rad;
    switch (params.scenario) {
      case SynthScenario::StaticGrasp:
        break;
      case SynthScenario::LineSweep: {
        const double s = params.frames > 1 ? static_cast<double>(f) / (params.frames - 1) : 0.0;
        target += (s - 0.5) * params.sweep_extent_m * params.knuckle_dir.normalized();
        break;
      }
      case SynthScenario::GraspCycle: {
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(f) /
                             static_cast<double>(params.cycle_frames);
        const double blend = 0.5 * (1.0 + std::cos(phase));
        half_angle = params.closed_half_angle_rad +
                     blend * (params.open_half_angle_rad - params.closed_half_angle_rad);
        break;
      }
    }

    const SyntheticHand hand =
        build_hand(target, params.knuckle_dir, params.finger_dir, half_angle, params);

    LandmarkFrame lf;
    lf.timestamp_s = static_cast<double>(f) / params.fps;
    lf.handedness = params.handedness;

    DepthFrame depth;
    depth.width = intrinsics.width;
    depth.height = intrinsics.height;
    depth.scale = intrinsics.depth_scale;
    depth.raster.assign(static_cast<std::size_t>(depth.width) * depth.height, 0);

    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
      const Point3 cam = calibration.robot_to_camera(robot_point(hand.points[i]));
      if (cam.z() < depth.min_depth_m || cam.z() > depth.max_depth_m) {
        std::ostringstream msg;
        msg << "frame " << f << " landmark " << i << " depth " << cam.z()
            << " m outside the valid range";
        throw Unreachable(msg.str());
      }
      const Eigen::Vector2d px = project(cam, intrinsics);
      if (px.x() < margin || px.x() > intrinsics.width - 1 - margin || px.y() < margin ||
          px.y() > intrinsics.height - 1 - margin) {
        std::ostringstream msg;
        msg << "frame " << f << " landmark " << i << " projects to (" << px.x() << ", " << px.y()
            << "), outside the camera frustum";
        throw Unreachable(msg.str());
      }
      lf.pixels[i] = px;
      lf.pixel_valid[i] = true;
      paint_disk(depth, px.x(), px.y(), cam.z(), params.depth_disk_radius_px);
    }

    char name[64];
    std::snprintf(name, sizeof(name), "frame_%06d.depth16", static_cast<int>(f));
    save_depth_frame(depth_dir / name, depth);

    stream.push_back(std::move(lf));
    truth.targets.push_back(truth_pose(target, params.knuckle_dir, params.finger_dir));
    truth.tip_angle_rad.push_back(2.0 * half_angle);
  }

  save_intrinsics(out_dir / "intrinsics.json", intrinsics);
  save_calibration(out_dir / "calibration.json", calibration);
  save_landmark_stream(out_dir / "landmarks.jsonl", stream);

  RecordingManifest manifest;
  manifest.intrinsics = out_dir / "intrinsics.json";
  manifest.landmarks = out_dir / "landmarks.jsonl";
  manifest.depth_dir = depth_dir;
  manifest.depth_pattern = "frame_%06d.depth16";
  manifest.frame_count = params.frames;
  manifest.fps = params.fps;
  save_manifest(out_dir / "manifest.json", manifest);

  const auto truth_path = out_dir / "truth.jsonl";
  save_truth(truth_path, truth);

  return {out_dir / "manifest.json", truth_path, std::move(truth)};
}

}  // namespace handik
