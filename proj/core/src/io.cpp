#include "handik/io.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace handik {

using nlohmann::json;

namespace {

json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

json parse_json_line(const std::string& line, const std::filesystem::path& path,
                     std::size_t lineno) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("short write to " + path.string());
}

Eigen::Vector3d to_vec3(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw FormatError(what + " must be a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Eigen::Matrix3d to_mat3(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw FormatError(what + " must be a 3x3 array");
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) {
    const json& row = j[r];
    if (!row.is_array() || row.size() != 3) throw FormatError(what + " must be a 3x3 array");
    for (int c = 0; c < 3; ++c) m(r, c) = row[c].get<double>();
  }
  return m;
}

json from_vec3(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

json from_mat3(const Eigen::Matrix3d& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
  return rows;
}

/// Fixed-axis roll-pitch-yaw, the URDF convention: R = Rz(yaw)Ry(pitch)Rx(roll).
Eigen::Matrix3d rpy_to_matrix(const Eigen::Vector3d& rpy) {
  return (Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

Eigen::Vector3d matrix_to_rpy(const Eigen::Matrix3d& m) {
  // Inverse of rpy_to_matrix; Eigen's eulerAngles(2,1,0) yields (yaw,pitch,roll).
  const Eigen::Vector3d ypr = m.eulerAngles(2, 1, 0);
  return {ypr.z(), ypr.y(), ypr.x()};
}

}  // namespace

const char* command_status_name(CommandStatus s) {
  switch (s) {
    case CommandStatus::Solved:
      return "Solved";
    case CommandStatus::HeldLastValid:
      return "HeldLastValid";
    case CommandStatus::Rejected:
      return "Rejected";
  }
  return "Rejected";
}

CommandStatus parse_command_status(const std::string& s) {
  if (s == "Solved") return CommandStatus::Solved;
  if (s == "HeldLastValid") return CommandStatus::HeldLastValid;
  if (s == "Rejected") return CommandStatus::Rejected;
  throw FormatError("unknown command status '" + s + "'");
}

// ---------------------------------------------------------------------------
// Intrinsics
// ---------------------------------------------------------------------------

CameraIntrinsics load_intrinsics(const std::filesystem::path& path) {
  const json j = parse_json_file(path);
  CameraIntrinsics k;
  try {
    k.fx = j.at("fx").get<double>();
    k.fy = j.at("fy").get<double>();
    k.cx = j.at("cx").get<double>();
    k.cy = j.at("cy").get<double>();
    k.width = j.at("width").get<int>();
    k.height = j.at("height").get<int>();
    k.depth_scale = j.at("depth_scale").get<double>();
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  k.validate();
  return k;
}

void save_intrinsics(const std::filesystem::path& path, const CameraIntrinsics& k) {
  json j{{"fx", k.fx},        {"fy", k.fy},         {"cx", k.cx},
         {"cy", k.cy},        {"width", k.width},   {"height", k.height},
         {"depth_scale", k.depth_scale}};
  write_text_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Kinematic chain
// ---------------------------------------------------------------------------

KinematicChain load_chain(const std::filesystem::path& path) {
  const json j = parse_json_file(path);
  try {
    std::vector<Joint> joints;
    for (const json& ij : j.at("joints")) {
      Joint joint;
      joint.name = ij.at("name").get<std::string>();
      joint.origin = Eigen::Isometry3d::Identity();
      joint.origin.translation() = to_vec3(ij.at("origin_xyz_m"), "origin_xyz_m");
      joint.origin.linear() = rpy_to_matrix(to_vec3(ij.at("origin_rpy_rad"), "origin_rpy_rad"));
      joint.axis = to_vec3(ij.at("axis_xyz"), "axis_xyz");
      joint.limit_min_rad = ij.at("limit_min_rad").get<double>();
      joint.limit_max_rad = ij.at("limit_max_rad").get<double>();
      joint.damping = ij.value("damping", 0.001);
      joints.push_back(std::move(joint));
    }
    const json& ee = j.at("end_effector");
    Eigen::Isometry3d ee_tf = Eigen::Isometry3d::Identity();
    ee_tf.translation() = to_vec3(ee.at("origin_xyz_m"), "end_effector origin_xyz_m");
    ee_tf.linear() = rpy_to_matrix(to_vec3(ee.at("origin_rpy_rad"), "end_effector origin_rpy_rad"));
    return KinematicChain(std::move(joints), ee_tf);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_chain(const std::filesystem::path& path, const KinematicChain& chain) {
  json joints = json::array();
  for (const Joint& joint : chain.joints()) {
    joints.push_back({{"name", joint.name},
                      {"origin_xyz_m", from_vec3(joint.origin.translation())},
                      {"origin_rpy_rad", from_vec3(matrix_to_rpy(joint.origin.rotation()))},
                      {"axis_xyz", from_vec3(joint.axis)},
                      {"limit_min_rad", joint.limit_min_rad},
                      {"limit_max_rad", joint.limit_max_rad},
                      {"damping", joint.damping}});
  }
  json j{{"joints", joints},
         {"end_effector",
          {{"origin_xyz_m", from_vec3(chain.end_effector().translation())},
           {"origin_rpy_rad", from_vec3(matrix_to_rpy(chain.end_effector().rotation()))}}}};
  write_text_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Calibration
// ---------------------------------------------------------------------------

CalibrationTransform load_calibration(const std::filesystem::path& path) {
  const json j = parse_json_file(path);
  try {
    const bool has_theta = j.contains("theta_rad");
    const bool has_rcam = j.contains("R_cam");
    if (has_theta == has_rcam) {
      throw FormatError(path.string() + ": exactly one of theta_rad / R_cam is required");
    }
    const Eigen::Vector3d t_cam = to_vec3(j.at("t_cam_m"), "t_cam_m");
    const Eigen::Matrix3d r_urdf =
        j.contains("R_urdf") ? to_mat3(j.at("R_urdf"), "R_urdf") : Eigen::Matrix3d::Identity();
    const Eigen::Vector3d t_urdf =
        j.contains("t_urdf_m") ? to_vec3(j.at("t_urdf_m"), "t_urdf_m") : Eigen::Vector3d::Zero();
    if (has_theta) {
      return CalibrationTransform::from_mount_angle(j.at("theta_rad").get<double>(), t_cam, r_urdf,
                                                    t_urdf);
    }
    return CalibrationTransform(to_mat3(j.at("R_cam"), "R_cam"), t_cam, r_urdf, t_urdf);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_calibration(const std::filesystem::path& path, const CalibrationTransform& c) {
  json j;
  if (c.mount_angle_rad()) {
    j["theta_rad"] = *c.mount_angle_rad();
  } else {
    j["R_cam"] = from_mat3(c.camera_rotation());
  }
  j["t_cam_m"] = from_vec3(c.camera_translation());
  j["R_urdf"] = from_mat3(c.urdf_rotation());
  j["t_urdf_m"] = from_vec3(c.urdf_translation());
  write_text_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Landmark stream
// ---------------------------------------------------------------------------

std::vector<LandmarkFrame> load_landmark_stream(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::vector<LandmarkFrame> frames;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const json j = parse_json_line(line, path, lineno);
    LandmarkFrame f;
    try {
      f.timestamp_s = j.at("timestamp_s").get<double>();
      f.handedness = parse_handedness(j.at("handedness").get<std::string>());
      const json& lm = j.at("landmarks");
      if (!lm.is_array() || lm.size() != kLandmarkCount) {
        throw FormatError(path.string() + ":" + std::to_string(lineno) +
                          ": landmarks must have exactly 21 entries");
      }
      for (std::size_t i = 0; i < kLandmarkCount; ++i) {
        const json& e = lm[i];
        if (!e.is_array() || e.size() != 3) {
          throw FormatError(path.string() + ":" + std::to_string(lineno) +
                            ": landmark entries are [u, v, valid]");
        }
        f.pixels[i] = {e[0].get<double>(), e[1].get<double>()};
        f.pixel_valid[i] = e[2].get<int>() != 0;
      }
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

void save_landmark_stream(const std::filesystem::path& path,
                          const std::vector<LandmarkFrame>& frames) {
  std::ostringstream out;
  for (const LandmarkFrame& f : frames) {
    json lm = json::array();
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
      lm.push_back(json::array(
          {f.pixels[i].x(), f.pixels[i].y(), f.pixel_valid[i] ? 1 : 0}));
    }
    json j{{"timestamp_s", f.timestamp_s},
           {"handedness", handedness_name(f.handedness)},
           {"landmarks", lm}};
    out << j.dump() << "\n";
  }
  write_text_file(path, out.str());
}

// ---------------------------------------------------------------------------
// Depth rasters: "depth16 <width> <height> <scale>\n" + little-endian u16
// ---------------------------------------------------------------------------

DepthFrame load_depth_frame(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::string header;
  if (!std::getline(in, header)) throw FormatError(path.string() + ": missing header line");
  std::istringstream hs(header);
  std::string magic;
  DepthFrame d;
  if (!(hs >> magic >> d.width >> d.height >> d.scale) || magic != "depth16") {
    throw FormatError(path.string() + ": bad header '" + header + "'");
  }
  if (d.width <= 0 || d.height <= 0 || !(d.scale > 0.0)) {
    throw FormatError(path.string() + ": non-positive raster dimensions or scale");
  }
  const std::size_t count = static_cast<std::size_t>(d.width) * d.height;
  std::vector<unsigned char> bytes(count * 2);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size()) {
    throw FormatError(path.string() + ": truncated raster (expected " +
                      std::to_string(bytes.size()) + " bytes)");
  }
  d.raster.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    d.raster[i] = static_cast<std::uint16_t>(bytes[2 * i] | (bytes[2 * i + 1] << 8));
  }
  return d;
}

void save_depth_frame(const std::filesystem::path& path, const DepthFrame& d) {
  if (d.raster.size() != static_cast<std::size_t>(d.width) * d.height) {
    throw ConfigError("depth frame raster size does not match its dimensions");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "depth16 " << d.width << " " << d.height << " " << d.scale << "\n";
  std::vector<unsigned char> bytes(d.raster.size() * 2);
  for (std::size_t i = 0; i < d.raster.size(); ++i) {
    bytes[2 * i] = static_cast<unsigned char>(d.raster[i] & 0xff);
    bytes[2 * i + 1] = static_cast<unsigned char>(d.raster[i] >> 8);
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConfigError("short write to " + path.string());
}

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

namespace {

json command_to_json(const JointCommand& c) {
  json angles = json::array();
  for (double a : c.arm_angles_rad) angles.push_back(a);
  angles.push_back(c.gripper_angle_rad);
  json j{{"timestamp_s", c.timestamp_s},
         {"status", command_status_name(c.status)},
         {"angles_rad", angles},
         {"normalized", c.normalized},
         {"motor", c.motor},
         {"gripper_level", c.gripper_level},
         {"ik_iterations", c.ik_iterations},
         {"ik_residual", c.ik_residual}};
  if (c.status == CommandStatus::Rejected) j["reason"] = c.reject_reason;
  return j;
}

JointCommand command_from_json(const json& j) {
  JointCommand c;
  c.timestamp_s = j.at("timestamp_s").get<double>();
  c.status = parse_command_status(j.at("status").get<std::string>());
  const json& angles = j.at("angles_rad");
  if (!angles.is_array() || angles.size() != 6) {
    throw FormatError("angles_rad must have 6 entries");
  }
  for (std::size_t i = 0; i < 5; ++i) c.arm_angles_rad[i] = angles[i].get<double>();
  c.gripper_angle_rad = angles[5].get<double>();
  const json& norm = j.at("normalized");
  const json& motor = j.at("motor");
  if (!norm.is_array() || norm.size() != 6 || !motor.is_array() || motor.size() != 6) {
    throw FormatError("normalized/motor must have 6 entries");
  }
  for (std::size_t i = 0; i < 6; ++i) {
    c.normalized[i] = norm[i].get<double>();
    c.motor[i] = motor[i].get<double>();
  }
  c.gripper_level = j.at("gripper_level").get<int>();
  c.ik_iterations = j.at("ik_iterations").get<int>();
  c.ik_residual = j.at("ik_residual").get<double>();
  if (c.status == CommandStatus::Rejected) c.reject_reason = j.value("reason", "");
  return c;
}

}  // namespace

std::string trajectory_to_string(const std::vector<JointCommand>& commands) {
  std::ostringstream out;
  for (const JointCommand& c : commands) out << command_to_json(c).dump() << "\n";
  return out.str();
}

void save_trajectory(const std::filesystem::path& path,
                     const std::vector<JointCommand>& commands) {
  write_text_file(path, trajectory_to_string(commands));
}

std::vector<JointCommand> load_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::vector<JointCommand> commands;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const json j = parse_json_line(line, path, lineno);
    try {
      commands.push_back(command_from_json(j));
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return commands;
}

void save_latency_sidecar(const std::filesystem::path& path,
                          const std::vector<StageReport>& stages) {
  json stage_list = json::array();
  double total_mean = 0.0;
  for (const StageReport& s : stages) {
    const LatencySummary sum = s.summary();
    stage_list.push_back({{"stage", s.stage},
                          {"count", s.samples_us.size()},
                          {"mean_us", sum.mean_us},
                          {"p50_us", sum.p50_us},
                          {"p95_us", sum.p95_us},
                          {"max_us", sum.max_us}});
    total_mean += sum.mean_us;
  }
  json j{{"stages", stage_list}, {"total_mean_us", total_mean}};
  write_text_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Recording bundles
// ---------------------------------------------------------------------------

RecordingManifest load_manifest(const std::filesystem::path& path) {
  const json j = parse_json_file(path);
  RecordingManifest m;
  try {
    const auto base = path.parent_path();
    m.intrinsics = base / j.at("intrinsics").get<std::string>();
    m.landmarks = base / j.at("landmarks").get<std::string>();
    m.depth_dir = base / j.at("depth_dir").get<std::string>();
    m.depth_pattern = j.at("depth_pattern").get<std::string>();
    m.frame_count = j.at("frame_count").get<std::size_t>();
    m.fps = j.at("fps").get<double>();
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (!(m.fps > 0.0)) throw FormatError(path.string() + ": fps must be positive");
  return m;
}

void save_manifest(const std::filesystem::path& path, const RecordingManifest& m) {
  // Paths are stored relative to the manifest location.
  json j{{"intrinsics", m.intrinsics.filename().string()},
         {"landmarks", m.landmarks.filename().string()},
         {"depth_dir", m.depth_dir.filename().string()},
         {"depth_pattern", m.depth_pattern},
         {"frame_count", m.frame_count},
         {"fps", m.fps}};
  write_text_file(path, j.dump(2) + "\n");
}

std::filesystem::path RecordingBundle::depth_path(std::size_t index) const {
  char name[256];
  std::snprintf(name, sizeof(name), manifest_.depth_pattern.c_str(), static_cast<int>(index));
  return manifest_.depth_dir / name;
}

RecordingBundle RecordingBundle::open(const std::filesystem::path& manifest_path) {
  RecordingBundle b;
  b.manifest_ = load_manifest(manifest_path);
  b.intrinsics_ = load_intrinsics(b.manifest_.intrinsics);
  b.landmark_frames_ = load_landmark_stream(b.manifest_.landmarks);
  if (b.landmark_frames_.size() != b.manifest_.frame_count) {
    throw AlignmentError("landmark stream has " + std::to_string(b.landmark_frames_.size()) +
                         " frames, manifest declares " + std::to_string(b.manifest_.frame_count));
  }
  for (std::size_t i = 0; i < b.manifest_.frame_count; ++i) {
    if (!std::filesystem::exists(b.depth_path(i))) {
      throw AlignmentError("depth frame " + std::to_string(i) + " missing: " +
                           b.depth_path(i).string());
    }
  }
  return b;
}

RecordingBundle::FramePair RecordingBundle::frame(std::size_t index) const {
  if (index >= manifest_.frame_count) {
    throw AlignmentError("frame index " + std::to_string(index) + " out of range");
  }
  FramePair p;
  p.landmarks = landmark_frames_[index];
  p.depth = load_depth_frame(depth_path(index));
  if (p.depth.width != intrinsics_.width || p.depth.height != intrinsics_.height) {
    throw AlignmentError("depth frame " + std::to_string(index) +
                         " size does not match intrinsics");
  }
  return p;
}

// ---------------------------------------------------------------------------
// Synthetic ground truth
// ---------------------------------------------------------------------------

void save_truth(const std::filesystem::path& path, const SynthTruth& truth) {
  std::ostringstream out;
  for (std::size_t i = 0; i < truth.targets.size(); ++i) {
    const TargetPose& t = truth.targets[i];
    const Eigen::Quaterniond& q = t.orientation;
    json j{{"target_position_m", from_vec3(t.position.xyz)},
           {"target_quat_wxyz", json::array({q.w(), q.x(), q.y(), q.z()})},
           {"orientation_source",
            t.orientation_source == OrientationSource::Primary ? "primary" : "wrist_fallback"},
           {"tip_angle_rad", truth.tip_angle_rad[i]}};
    out << j.dump() << "\n";
  }
  write_text_file(path, out.str());
}

SynthTruth load_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  SynthTruth truth;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const json j = parse_json_line(line, path, lineno);
    try {
      TargetPose t;
      t.position = robot_point(to_vec3(j.at("target_position_m"), "target_position_m"));
      const json& q = j.at("target_quat_wxyz");
      t.orientation = Eigen::Quaterniond(q[0].get<double>(), q[1].get<double>(),
                                         q[2].get<double>(), q[3].get<double>());
      t.orientation_source = j.at("orientation_source").get<std::string>() == "primary"
                                 ? OrientationSource::Primary
                                 : OrientationSource::WristFallback;
      truth.targets.push_back(t);
      truth.tip_angle_rad.push_back(j.at("tip_angle_rad").get<double>());
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return truth;
}

// ---------------------------------------------------------------------------
// Replay validation
// ---------------------------------------------------------------------------

const char* replay_flag_name(ReplayFlagKind k) {
  switch (k) {
    case ReplayFlagKind::JointLimit:
      return "joint_limit";
    case ReplayFlagKind::Velocity:
      return "velocity";
    case ReplayFlagKind::Acceleration:
      return "acceleration";
    case ReplayFlagKind::ZFloor:
      return "z_floor";
  }
  return "joint_limit";
}

ReplayReport fk_replay_validate(const std::vector<JointCommand>& trajectory,
                                const KinematicChain& chain, const ReplayLimits& limits,
                                double fps) {
  if (!(fps > 0.0)) throw ConfigError("fk_replay_validate: fps must be positive");
  if (chain.dof() != 6) {
    throw ConfigError("fk_replay_validate: expected a 6-joint chain (5 arm + gripper)");
  }

  ReplayReport report;
  report.frames = trajectory.size();
  report.ee_positions.resize(trajectory.size());

  auto command_angles = [](const JointCommand& c) {
    Eigen::VectorXd q(6);
    for (std::size_t i = 0; i < 5; ++i) q[static_cast<Eigen::Index>(i)] = c.arm_angles_rad[i];
    q[5] = c.gripper_angle_rad;
    return q;
  };
  auto velocity_bound = [&](std::size_t joint) {
    return joint == 5 ? limits.gripper_velocity_rad_s : limits.arm_velocity_rad_s;
  };
  auto acceleration_bound = [&](std::size_t joint) {
    return joint == 5 ? limits.gripper_acceleration_rad_s2 : limits.arm_acceleration_rad_s2;
  };

  // Rejected rows are placeholders without a command; they break the
  // finite-difference chains around them.
  std::vector<std::optional<Eigen::VectorXd>> qs(trajectory.size());
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    if (trajectory[i].status == CommandStatus::Rejected) continue;
    qs[i] = command_angles(trajectory[i]);

    for (std::size_t jnt = 0; jnt < 6; ++jnt) {
      const Joint& joint = chain.joint(jnt);
      const double v = (*qs[i])[static_cast<Eigen::Index>(jnt)];
      if (v < joint.limit_min_rad - 1e-9 || v > joint.limit_max_rad + 1e-9) {
        report.flags.push_back({i, ReplayFlagKind::JointLimit, joint.name, v,
                                v < joint.limit_min_rad ? joint.limit_min_rad
                                                        : joint.limit_max_rad});
      }
    }

    const Pose pose = forward_kinematics(chain, *qs[i]);
    report.ee_positions[i] = pose.position;
    if (pose.position.z() < limits.z_floor_m) {
      report.flags.push_back(
          {i, ReplayFlagKind::ZFloor, "", pose.position.z(), limits.z_floor_m});
    }
  }

  for (std::size_t i = 1; i < trajectory.size(); ++i) {
    if (!qs[i] || !qs[i - 1]) continue;
    const Eigen::VectorXd dv = (*qs[i] - *qs[i - 1]) * fps;
    for (std::size_t jnt = 0; jnt < 6; ++jnt) {
      const double v = std::abs(dv[static_cast<Eigen::Index>(jnt)]);
      if (v > velocity_bound(jnt)) {
        report.flags.push_back(
            {i, ReplayFlagKind::Velocity, chain.joint(jnt).name, v, velocity_bound(jnt)});
      }
    }
  }

  for (std::size_t i = 1; i + 1 < trajectory.size(); ++i) {
    if (!qs[i - 1] || !qs[i] || !qs[i + 1]) continue;
    const Eigen::VectorXd acc = (*qs[i + 1] - 2.0 * *qs[i] + *qs[i - 1]) * fps * fps;
    for (std::size_t jnt = 0; jnt < 6; ++jnt) {
      const double a = std::abs(acc[static_cast<Eigen::Index>(jnt)]);
      if (a > acceleration_bound(jnt)) {
        report.flags.push_back(
            {i, ReplayFlagKind::Acceleration, chain.joint(jnt).name, a, acceleration_bound(jnt)});
      }
    }
  }

  return report;
}

std::string replay_report_to_string(const ReplayReport& report) {
  std::ostringstream out;
  out << "frames: " << report.frames << "\n";
  if (report.ok()) {
    out << "result: clean (no flags)\n";
    return out.str();
  }
  out << "result: " << report.flags.size() << " flag(s)\n";
  for (const ReplayFlag& f : report.flags) {
    out << "  frame " << f.frame << ": " << replay_flag_name(f.kind);
    if (!f.joint.empty()) out << " joint=" << f.joint;
    out << " value=" << f.value << " bound=" << f.bound << "\n";
  }
  return out.str();
}

void save_replay_report(const std::filesystem::path& path, const ReplayReport& report) {
  json flags = json::array();
  for (const ReplayFlag& f : report.flags) {
    flags.push_back({{"frame", f.frame},
                     {"kind", replay_flag_name(f.kind)},
                     {"joint", f.joint},
                     {"value", f.value},
                     {"bound", f.bound}});
  }
  json positions = json::array();
  for (const auto& p : report.ee_positions) {
    positions.push_back(p ? from_vec3(*p) : json(nullptr));
  }
  json j{{"frames", report.frames}, {"ok", report.ok()}, {"flags", flags},
         {"ee_positions", positions}};
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace handik
