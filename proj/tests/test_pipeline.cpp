#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "handik/pipeline.hpp"
#include "handik/presets.hpp"
#include "support/testutil.hpp"

#include <filesystem>
#include <fstream>

using namespace handik;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("handik_pipeline_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

SynthOutput make_synth(const fs::path& dir, SynthParams params) {
  return synth_recording(params, presets::egocentric_calibration(), presets::vga_intrinsics(),
                         dir);
}

Pipeline make_pipeline(PipelineOptions opts = {}) {
  return Pipeline(presets::so101_chain(), presets::egocentric_calibration(), std::move(opts));
}

Eigen::VectorXd command_q(const JointCommand& c) {
  Eigen::VectorXd q(6);
  for (int i = 0; i < 5; ++i) q[i] = c.arm_angles_rad[static_cast<std::size_t>(i)];
  q[5] = c.gripper_angle_rad;
  return q;
}

}  // namespace

TEST_CASE("normalization and motor mapping") {
  const auto chain = presets::so101_chain();

  SUBCASE("mid-range maps to motor zero for arm joints") {
    const Eigen::VectorXd mid = chain.mid_range();
    const auto out = normalize_and_map(mid.head<5>(), 0.785, chain);
    for (int i = 0; i < 5; ++i) {
      CHECK(out.normalized[static_cast<std::size_t>(i)] == doctest::Approx(0.5));
      CHECK(out.motor[static_cast<std::size_t>(i)] == doctest::Approx(0.0));
    }
  }

  SUBCASE("range endpoints map to the motor extremes exactly") {
    const auto lo = normalize_and_map(chain.lower_limits().head<5>(),
                                      chain.joint(5).limit_min_rad, chain);
    const auto hi = normalize_and_map(chain.upper_limits().head<5>(),
                                      chain.joint(5).limit_max_rad, chain);
    for (int i = 0; i < 5; ++i) {
      CHECK(lo.normalized[static_cast<std::size_t>(i)] == 0.0);
      CHECK(lo.motor[static_cast<std::size_t>(i)] == -100.0);
      CHECK(hi.normalized[static_cast<std::size_t>(i)] == 1.0);
      CHECK(hi.motor[static_cast<std::size_t>(i)] == 100.0);
    }
    CHECK(lo.normalized[5] == 0.0);
    CHECK(lo.motor[5] == 0.0);
    CHECK(hi.normalized[5] == 1.0);
    CHECK(hi.motor[5] == 100.0);
  }

  SUBCASE("shoulder pan at +1.920 rad normalizes to exactly one") {
    Eigen::VectorXd arm = chain.mid_range().head<5>();
    arm[0] = 1.920;
    const auto out = normalize_and_map(arm, 0.8, chain);
    CHECK(out.normalized[0] == 1.0);
    CHECK(out.motor[0] == 100.0);
  }

  SUBCASE("out-of-range angles clamp instead of extrapolating") {
    Eigen::VectorXd arm = chain.mid_range().head<5>();
    arm[1] = 99.0;
    const auto out = normalize_and_map(arm, 0.8, chain);
    CHECK(out.normalized[1] == 1.0);
    CHECK(out.motor[1] == 100.0);
  }

  SUBCASE("non-finite angles throw") {
    Eigen::VectorXd arm = chain.mid_range().head<5>();
    arm[2] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(normalize_and_map(arm, 0.8, chain), NonFinite);
    CHECK_THROWS_AS(normalize_and_map(Eigen::VectorXd::Zero(4), 0.8, chain), LengthMismatch);
  }
}

TEST_CASE("empty recordings produce empty results") {
  TempDir dir;
  RecordingManifest m;
  m.intrinsics = dir.path / "k.json";
  m.landmarks = dir.path / "landmarks.jsonl";
  m.depth_dir = dir.path / "depth";
  m.frame_count = 0;
  save_intrinsics(m.intrinsics, presets::vga_intrinsics());
  save_landmark_stream(m.landmarks, {});
  fs::create_directories(m.depth_dir);
  save_manifest(dir.path / "manifest.json", m);

  auto pipe = make_pipeline();
  const auto result = pipe.process_stream(RecordingBundle::open(dir.path / "manifest.json"));
  CHECK(result.trajectory.empty());
  REQUIRE(result.stages.size() == 5);
  for (const auto& s : result.stages) CHECK(s.samples_us.empty());
}

TEST_CASE("static grasp solves every frame and tracks the target") {
  TempDir dir;
  SynthParams sp;
  sp.frames = 40;
  const auto out = make_synth(dir.path, sp);
  const auto rec = RecordingBundle::open(out.manifest_path);

  auto pipe = make_pipeline();
  const auto result = pipe.process_stream(rec);

  REQUIRE(result.trajectory.size() == 40);
  CHECK(result.count(CommandStatus::Solved) == 40);

  const auto chain = presets::so101_chain();
  for (std::size_t f = 10; f < result.trajectory.size(); ++f) {
    const Pose fk = forward_kinematics(chain, command_q(result.trajectory[f]));
    CHECK((fk.position - out.truth.targets[f].position.xyz).norm() < 5e-3);
  }

  // Geometric stages alone reconstruct the target below a millimetre.
  for (std::size_t f = 0; f < result.trajectory.size(); ++f) {
    REQUIRE(result.targets[f].has_value());
    CHECK((result.targets[f]->position.xyz - out.truth.targets[f].position.xyz).norm() < 1e-3);
    CHECK(test::quaternion_angle(result.targets[f]->orientation,
                                 out.truth.targets[f].orientation) < 0.02);
  }
}

TEST_CASE("identical runs give bit-identical trajectories") {
  TempDir dir;
  SynthParams sp;
  sp.frames = 15;
  const auto out = make_synth(dir.path, sp);
  const auto rec = RecordingBundle::open(out.manifest_path);

  auto pipe_a = make_pipeline();
  auto pipe_b = make_pipeline();
  const std::string a = trajectory_to_string(pipe_a.process_stream(rec).trajectory);
  const std::string b = trajectory_to_string(pipe_b.process_stream(rec).trajectory);
  CHECK(a == b);
}

TEST_CASE("solved commands respect limits and the motor map") {
  TempDir dir;
  SynthParams sp;
  sp.scenario = SynthScenario::GraspCycle;
  sp.frames = 50;
  const auto out = make_synth(dir.path, sp);
  const auto rec = RecordingBundle::open(out.manifest_path);

  auto pipe = make_pipeline();
  const auto result = pipe.process_stream(rec);
  const auto chain = pipe.chain();

  for (const auto& cmd : result.trajectory) {
    REQUIRE(cmd.status == CommandStatus::Solved);
    CHECK(chain.within_limits(command_q(cmd)));
    for (std::size_t i = 0; i < 6; ++i) {
      const Joint& j = chain.joint(i);
      const double angle = i < 5 ? cmd.arm_angles_rad[i] : cmd.gripper_angle_rad;
      const double norm = (angle - j.limit_min_rad) / (j.limit_max_rad - j.limit_min_rad);
      CHECK(cmd.normalized[i] == doctest::Approx(norm).epsilon(1e-12));
      const double motor = i < 5 ? (cmd.normalized[i] - 0.5) * 200.0 : cmd.normalized[i] * 100.0;
      CHECK(cmd.motor[i] == doctest::Approx(motor).epsilon(1e-12));
    }
    CHECK(cmd.gripper_level == 1);
  }
}

TEST_CASE("grasp cycle in binary mode flips between the jaw endpoints") {
  TempDir dir;
  SynthParams sp;
  sp.scenario = SynthScenario::GraspCycle;
  sp.frames = 90;
  const auto out = make_synth(dir.path, sp);
  const auto rec = RecordingBundle::open(out.manifest_path);

  PipelineOptions opts;
  opts.gripper.mode = GripperMode{GripperModeKind::Binary, 0.0};
  auto pipe = make_pipeline(opts);
  const auto result = pipe.process_stream(rec);

  bool saw_open = false;
  bool saw_closed = false;
  for (const auto& cmd : result.trajectory) {
    REQUIRE(cmd.status == CommandStatus::Solved);
    const bool open = cmd.gripper_angle_rad == doctest::Approx(1.658);
    const bool closed = cmd.gripper_angle_rad == doctest::Approx(0.087);
    CHECK((open || closed));
    saw_open |= open;
    saw_closed |= closed;
  }
  CHECK(saw_open);
  CHECK(saw_closed);
}

TEST_CASE("frames with too few valid landmarks hold the last command") {
  TempDir dir;
  SynthParams sp;
  sp.frames = 6;
  const auto out = make_synth(dir.path, sp);

  // Invalidate 11 landmarks in frame 3, leaving 10 valid: one short of half.
  auto frames = load_landmark_stream(dir.path / "landmarks.jsonl");
  for (std::size_t i = 0; i < 11; ++i) frames[3].pixel_valid[i] = false;
  save_landmark_stream(dir.path / "landmarks.jsonl", frames);

  auto pipe = make_pipeline();
  const auto result = pipe.process_stream(RecordingBundle::open(out.manifest_path));
  REQUIRE(result.trajectory.size() == 6);
  CHECK(result.trajectory[2].status == CommandStatus::Solved);
  CHECK(result.trajectory[3].status == CommandStatus::HeldLastValid);
  CHECK(result.trajectory[4].status == CommandStatus::Solved);
  // The held frame repeats the previous command's payload.
  CHECK(result.trajectory[3].arm_angles_rad == result.trajectory[2].arm_angles_rad);
  CHECK(result.trajectory[3].gripper_angle_rad == result.trajectory[2].gripper_angle_rad);
  CHECK(result.trajectory[3].timestamp_s == doctest::Approx(3.0 / 30.0));
}

TEST_CASE("exactly eleven valid landmarks still pass the acceptance rule") {
  TempDir dir;
  SynthParams sp;
  sp.frames = 3;
  const auto out = make_synth(dir.path, sp);

  // Keep 11 landmarks: wrist, full thumb, full index, one middle knuckle
  // and the pinky tip; the other ten go invalid.
  auto frames = load_landmark_stream(dir.path / "landmarks.jsonl");
  for (std::size_t i = 10; i < kLandmarkCount - 1; ++i) frames[1].pixel_valid[i] = false;
  save_landmark_stream(dir.path / "landmarks.jsonl", frames);

  auto pipe = make_pipeline();
  const auto result = pipe.process_stream(RecordingBundle::open(out.manifest_path));
  CHECK(result.trajectory[1].status == CommandStatus::Solved);
}

TEST_CASE("frames of the other hand are ignored") {
  TempDir dir;
  SynthParams sp;
  sp.frames = 4;
  sp.handedness = Handedness::Left;
  const auto out = make_synth(dir.path, sp);

  auto pipe = make_pipeline();  // expects Right
  const auto result = pipe.process_stream(RecordingBundle::open(out.manifest_path));
  REQUIRE(result.trajectory.size() == 4);
  for (const auto& cmd : result.trajectory) {
    CHECK(cmd.status == CommandStatus::Rejected);
    CHECK(cmd.reject_reason == "wrong handedness");
  }

  PipelineOptions opts;
  opts.handedness = Handedness::Left;
  auto left_pipe = make_pipeline(opts);
  const auto left = left_pipe.process_stream(RecordingBundle::open(out.manifest_path));
  CHECK(left.count(CommandStatus::Solved) == 4);
}

TEST_CASE("targets below the z floor hold instead of solving") {
  TempDir dir;
  SynthParams sp;
  sp.frames = 3;
  sp.target_m = {0.06, -0.30, 0.04};  // below the 5 cm floor
  const auto out = make_synth(dir.path, sp);

  auto pipe = make_pipeline();
  const auto result = pipe.process_stream(RecordingBundle::open(out.manifest_path));
  for (const auto& cmd : result.trajectory) {
    CHECK(cmd.status == CommandStatus::Rejected);
    CHECK(cmd.reject_reason == "target below z floor");
  }
  // The reconstructed targets are still reported for diagnostics.
  REQUIRE(result.targets[0].has_value());
  CHECK(result.targets[0]->position.z() < 0.05);
}

TEST_CASE("rejected placeholders precede the first valid frame") {
  TempDir dir;
  SynthParams sp;
  sp.frames = 5;
  const auto out = make_synth(dir.path, sp);

  // Kill every landmark in frames 0-1.
  auto frames = load_landmark_stream(dir.path / "landmarks.jsonl");
  for (std::size_t f = 0; f < 2; ++f) frames[f].pixel_valid.fill(false);
  save_landmark_stream(dir.path / "landmarks.jsonl", frames);

  auto pipe = make_pipeline();
  const auto result = pipe.process_stream(RecordingBundle::open(out.manifest_path));
  CHECK(result.trajectory[0].status == CommandStatus::Rejected);
  CHECK(result.trajectory[0].reject_reason == "too few valid landmarks");
  CHECK(result.trajectory[1].status == CommandStatus::Rejected);
  CHECK(result.trajectory[2].status == CommandStatus::Solved);
  // Placeholder rows still satisfy the normalization formula (zero angles).
  const auto chain = pipe.chain();
  for (std::size_t i = 0; i < 6; ++i) {
    const Joint& j = chain.joint(i);
    const double norm = (0.0 - j.limit_min_rad) / (j.limit_max_rad - j.limit_min_rad);
    CHECK(result.trajectory[0].normalized[i] == doctest::Approx(norm));
  }
}

TEST_CASE("latency sample counts match the frames that entered each stage") {
  TempDir dir;
  SynthParams sp;
  sp.frames = 12;
  const auto out = make_synth(dir.path, sp);

  auto pipe = make_pipeline();
  const auto result = pipe.process_stream(RecordingBundle::open(out.manifest_path));

  REQUIRE(result.stages.size() == 5);
  CHECK(result.stages[0].stage == "recording_input");
  CHECK(result.stages[1].stage == "landmark_smoothing");
  CHECK(result.stages[2].stage == "depth_deprojection");
  CHECK(result.stages[3].stage == "coordinate_transform");
  CHECK(result.stages[4].stage == "ik_gripper");
  for (const auto& s : result.stages) CHECK(s.samples_us.size() == 12);

  // Early-exit frames stop at the rejecting stage.
  auto frames = load_landmark_stream(dir.path / "landmarks.jsonl");
  frames[5].pixel_valid.fill(false);
  save_landmark_stream(dir.path / "landmarks.jsonl", frames);
  auto pipe2 = make_pipeline();
  const auto result2 = pipe2.process_stream(RecordingBundle::open(out.manifest_path));
  CHECK(result2.stages[2].samples_us.size() == 12);
  CHECK(result2.stages[3].samples_us.size() == 11);
  CHECK(result2.stages[4].samples_us.size() == 11);
}

TEST_CASE("latency summaries add up and format") {
  StageReport a{"alpha", {1000.0, 1000.0, 1000.0}};
  StageReport b{"beta", {2000.0, 2000.0, 2000.0}};
  const auto sa = a.summary();
  CHECK(sa.mean_us == doctest::Approx(1000.0));
  CHECK(sa.p50_us == doctest::Approx(1000.0));
  CHECK(sa.max_us == doctest::Approx(1000.0));

  const std::string table = latency_report({a, b});
  CHECK(table.find("alpha") != std::string::npos);
  CHECK(table.find("3000.0") != std::string::npos);  // total mean

  const StageReport empty{"none", {}};
  const auto se = empty.summary();
  CHECK(se.mean_us == 0.0);
  CHECK(se.max_us == 0.0);
}

TEST_CASE("percentiles use the nearest-rank convention") {
  StageReport s{"s", {}};
  for (int i = 1; i <= 100; ++i) s.samples_us.push_back(static_cast<double>(i));
  const auto sum = s.summary();
  CHECK(sum.p50_us == doctest::Approx(50.0));
  CHECK(sum.p95_us == doctest::Approx(95.0));
  CHECK(sum.max_us == doctest::Approx(100.0));
}

TEST_CASE("config validation enforces single sources") {
  PipelineConfig c;
  c.chain_preset = "so101";
  c.calibration_preset = "egocentric";
  CHECK_NOTHROW(c.validate());
  c.chain_path = "also/a/file.json";
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.chain_path.clear();
  c.calibration_preset.clear();
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("pipelines are built from configs with presets") {
  PipelineConfig c;
  c.chain_preset = "so101";
  c.calibration_preset = "egocentric";
  auto pipe = Pipeline::from_config(c);
  CHECK(pipe.chain().dof() == 6);
  c.chain_preset = "pr2";
  CHECK_THROWS_AS(Pipeline::from_config(c), ConfigError);
}

TEST_CASE("pipelines demand the 5+1 joint layout") {
  Joint j;
  j.name = "only";
  j.axis = Eigen::Vector3d::UnitZ();
  j.limit_min_rad = -1.0;
  j.limit_max_rad = 1.0;
  CHECK_THROWS_AS(Pipeline(KinematicChain({j}, Eigen::Isometry3d::Identity()),
                           presets::egocentric_calibration()),
                  ConfigError);
}
