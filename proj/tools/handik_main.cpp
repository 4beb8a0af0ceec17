// handik: offline hand-to-robot retargeting from recorded RGB-D hand streams.

#include "handik/io.hpp"
#include "handik/pipeline.hpp"
#include "handik/presets.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace handik;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidationFailure = 1;
constexpr int kExitConfigError = 2;

struct ProcessArgs {
  std::string manifest;
  std::string out_dir;
  std::string config_file;
  std::string chain_path;
  std::string chain_preset;
  std::string calibration_path;
  std::string calibration_preset;
  std::string gripper_mode;
  std::string handedness;
  double alpha_2d = 0.8;
  double alpha_joints = 0.5;
  double z_floor = 0.05;
  int ik_max_iterations = 100;
  double ik_residual_threshold = 1e-4;
  double ik_position_weight = 1.0;
  double ik_orientation_weight = 0.5;
  double ik_step_clamp = 0.2;
  bool verbose = false;
};

/// Reads a pipeline config file. Unknown keys are rejected so typos do not
/// silently fall back to defaults.
PipelineConfig read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }

  static const std::set<std::string> known = {
      "chain_path", "chain_preset", "calibration_path", "calibration_preset",
      "alpha_2d",   "alpha_joints", "handedness",       "z_floor_m",
      "ik",         "gripper"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!known.count(key)) throw ConfigError(path.string() + ": unknown key '" + key + "'");
  }

  PipelineConfig cfg;
  cfg.chain_path = j.value("chain_path", "");
  cfg.chain_preset = j.value("chain_preset", "");
  cfg.calibration_path = j.value("calibration_path", "");
  cfg.calibration_preset = j.value("calibration_preset", "");
  cfg.options.alpha_2d = j.value("alpha_2d", cfg.options.alpha_2d);
  cfg.options.alpha_joints = j.value("alpha_joints", cfg.options.alpha_joints);
  cfg.options.z_floor_m = j.value("z_floor_m", cfg.options.z_floor_m);
  if (j.contains("handedness")) {
    cfg.options.handedness = parse_handedness(j.at("handedness").get<std::string>());
  }
  if (j.contains("ik")) {
    const json& ik = j.at("ik");
    cfg.options.ik.max_iterations = ik.value("max_iterations", cfg.options.ik.max_iterations);
    cfg.options.ik.residual_threshold =
        ik.value("residual_threshold", cfg.options.ik.residual_threshold);
    cfg.options.ik.position_weight = ik.value("position_weight", cfg.options.ik.position_weight);
    cfg.options.ik.orientation_weight =
        ik.value("orientation_weight", cfg.options.ik.orientation_weight);
    cfg.options.ik.step_clamp_rad = ik.value("step_clamp_rad", cfg.options.ik.step_clamp_rad);
  }
  if (j.contains("gripper")) {
    const json& g = j.at("gripper");
    cfg.options.gripper.phi_min_rad = g.value("phi_min_rad", cfg.options.gripper.phi_min_rad);
    cfg.options.gripper.phi_max_rad = g.value("phi_max_rad", cfg.options.gripper.phi_max_rad);
    cfg.options.gripper.calibration_offset_rad =
        g.value("calibration_offset_rad", cfg.options.gripper.calibration_offset_rad);
    cfg.options.gripper.binary_threshold_rad =
        g.value("binary_threshold_rad", cfg.options.gripper.binary_threshold_rad);
    if (g.contains("mode")) {
      cfg.options.gripper.mode = GripperMode::parse(g.at("mode").get<std::string>());
    }
  }
  return cfg;
}

int run_process(const ProcessArgs& args, const CLI::App& cmd) {
  // Precedence: built-in defaults < config file < explicit flags.
  PipelineConfig cfg;
  if (!args.config_file.empty()) cfg = read_config_file(args.config_file);

  auto flag_given = [&](const std::string& name) { return cmd.count(name) > 0; };
  if (flag_given("--chain")) {
    cfg.chain_path = args.chain_path;
    cfg.chain_preset.clear();
  }
  if (flag_given("--chain-preset")) {
    cfg.chain_preset = args.chain_preset;
    cfg.chain_path.clear();
  }
  if (flag_given("--calibration")) {
    cfg.calibration_path = args.calibration_path;
    cfg.calibration_preset.clear();
  }
  if (flag_given("--calibration-preset")) {
    cfg.calibration_preset = args.calibration_preset;
    cfg.calibration_path.clear();
  }
  if (cfg.chain_path.empty() && cfg.chain_preset.empty()) cfg.chain_preset = "so101";
  if (cfg.calibration_path.empty() && cfg.calibration_preset.empty()) {
    cfg.calibration_preset = "egocentric";
  }

  if (flag_given("--alpha-2d")) cfg.options.alpha_2d = args.alpha_2d;
  if (flag_given("--alpha-joints")) cfg.options.alpha_joints = args.alpha_joints;
  if (flag_given("--z-floor")) cfg.options.z_floor_m = args.z_floor;
  if (flag_given("--handedness")) cfg.options.handedness = parse_handedness(args.handedness);
  if (flag_given("--gripper-mode")) cfg.options.gripper.mode = GripperMode::parse(args.gripper_mode);
  if (flag_given("--ik-max-iterations")) cfg.options.ik.max_iterations = args.ik_max_iterations;
  if (flag_given("--ik-residual-threshold")) {
    cfg.options.ik.residual_threshold = args.ik_residual_threshold;
  }
  if (flag_given("--ik-position-weight")) cfg.options.ik.position_weight = args.ik_position_weight;
  if (flag_given("--ik-orientation-weight")) {
    cfg.options.ik.orientation_weight = args.ik_orientation_weight;
  }
  if (flag_given("--ik-step-clamp")) cfg.options.ik.step_clamp_rad = args.ik_step_clamp;

  Pipeline pipeline = Pipeline::from_config(cfg);
  const RecordingBundle recording = RecordingBundle::open(args.manifest);

  const ProcessResult result = pipeline.process_stream(recording);

  fs::create_directories(args.out_dir);
  const fs::path trajectory_path = fs::path(args.out_dir) / "trajectory.jsonl";
  const fs::path latency_path = fs::path(args.out_dir) / "latency.json";
  save_trajectory(trajectory_path, result.trajectory);
  save_latency_sidecar(latency_path, result.stages);

  double iter_sum = 0.0;
  std::size_t solved = 0;
  for (const JointCommand& c : result.trajectory) {
    if (c.status == CommandStatus::Solved) {
      iter_sum += c.ik_iterations;
      ++solved;
    }
  }
  std::cout << "frames=" << result.trajectory.size() << " solved=" << solved
            << " held=" << result.count(CommandStatus::HeldLastValid)
            << " rejected=" << result.count(CommandStatus::Rejected) << " mean_ik_iterations="
            << (solved ? iter_sum / static_cast<double>(solved) : 0.0) << "\n";
  std::cout << "trajectory: " << trajectory_path.string() << "\n";
  std::cout << "latency:    " << latency_path.string() << "\n";
  if (args.verbose) std::cout << "\n" << latency_report(result.stages);
  return kExitOk;
}

struct ReplayArgs {
  std::string trajectory;
  std::string chain_path;
  std::string chain_preset = "so101";
  std::string report_path;
  double fps = 30.0;
  ReplayLimits limits{};
};

int run_fk_replay(const ReplayArgs& args) {
  const KinematicChain chain = args.chain_path.empty()
                                   ? presets::chain_preset(args.chain_preset)
                                   : load_chain(args.chain_path);
  const auto trajectory = load_trajectory(args.trajectory);
  const ReplayReport report = fk_replay_validate(trajectory, chain, args.limits, args.fps);
  std::cout << replay_report_to_string(report);
  if (!args.report_path.empty()) save_replay_report(args.report_path, report);
  return report.ok() ? kExitOk : kExitValidationFailure;
}

struct SynthArgs {
  std::string scenario = "static_grasp";
  std::string out_dir;
  std::string calibration_path;
  std::string calibration_preset = "egocentric";
  std::string intrinsics_path;
  std::size_t frames = 300;
  double fps = 30.0;
  std::string handedness = "Right";
};

int run_synth(const SynthArgs& args) {
  SynthParams params;
  params.scenario = parse_scenario(args.scenario);
  params.frames = args.frames;
  params.fps = args.fps;
  params.handedness = parse_handedness(args.handedness);

  const CalibrationTransform calibration =
      args.calibration_path.empty() ? presets::calibration_preset(args.calibration_preset)
                                    : load_calibration(args.calibration_path);
  const CameraIntrinsics intrinsics = args.intrinsics_path.empty()
                                          ? presets::vga_intrinsics()
                                          : load_intrinsics(args.intrinsics_path);

  const SynthOutput out = synth_recording(params, calibration, intrinsics, args.out_dir);
  std::cout << "scenario=" << args.scenario << " frames=" << args.frames << "\n";
  std::cout << "manifest:     " << out.manifest_path.string() << "\n";
  std::cout << "ground truth: " << out.truth_path.string() << "\n";
  return kExitOk;
}

struct BenchArgs {
  std::string chain_path;
  std::string chain_preset = "so101";
  std::size_t count = 1000;
  std::uint64_t seed = 42;
  bool as_json = false;
};

int run_bench(const BenchArgs& args) {
  const KinematicChain chain = args.chain_path.empty()
                                   ? presets::chain_preset(args.chain_preset)
                                   : load_chain(args.chain_path);
  std::mt19937_64 rng(args.seed);

  auto random_q = [&]() {
    Eigen::VectorXd q(chain.dof());
    for (std::size_t i = 0; i < chain.dof(); ++i) {
      std::uniform_real_distribution<double> u(chain.joint(i).limit_min_rad,
                                               chain.joint(i).limit_max_rad);
      q[static_cast<Eigen::Index>(i)] = u(rng);
    }
    return q;
  };

  std::vector<double> times_us;
  times_us.reserve(args.count);
  std::size_t converged = 0;
  double iter_sum = 0.0;
  std::uniform_real_distribution<double> noise(-0.1, 0.1);

  for (std::size_t i = 0; i < args.count; ++i) {
    const Eigen::VectorXd q_goal = random_q();
    Eigen::VectorXd rest = q_goal;
    for (Eigen::Index k = 0; k < rest.size(); ++k) rest[k] += noise(rng);
    rest = chain.clamp_to_limits(rest);

    const Pose goal = forward_kinematics(chain, q_goal);
    TargetPose target;
    target.position = robot_point(goal.position);
    target.orientation = goal.orientation;

    const auto start = std::chrono::steady_clock::now();
    const IkResult r = solve_ik(chain, target, rest);
    const auto stop = std::chrono::steady_clock::now();
    times_us.push_back(std::chrono::duration<double, std::micro>(stop - start).count());
    if (r.report.converged) ++converged;
    iter_sum += r.report.iterations;
  }

  StageReport timing{"ik_solve", times_us};
  const LatencySummary sum = timing.summary();
  const double rate =
      args.count ? static_cast<double>(converged) / static_cast<double>(args.count) : 0.0;
  const double mean_iters = args.count ? iter_sum / static_cast<double>(args.count) : 0.0;

  if (args.as_json) {
    json j{{"solves", args.count},       {"seed", args.seed},
           {"converged", converged},     {"convergence_rate", rate},
           {"mean_iterations", mean_iters}, {"mean_us", sum.mean_us},
           {"p50_us", sum.p50_us},       {"p95_us", sum.p95_us},
           {"max_us", sum.max_us}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "solves=" << args.count << " converged=" << converged << " rate=" << rate
              << " mean_iterations=" << mean_iters << "\n";
    std::cout << "time_us mean=" << sum.mean_us << " p50=" << sum.p50_us << " p95=" << sum.p95_us
              << " max=" << sum.max_us << "\n";
  }
  return kExitOk;
}

struct ValidateArgs {
  std::string manifest;
  std::string chain;
  std::string calibration;
  std::string intrinsics;
  std::string trajectory;
};

int run_validate_config(const ValidateArgs& args) {
  bool any = false;
  auto check = [&](const std::string& label, const std::string& path, auto&& loader) {
    if (path.empty()) return;
    any = true;
    loader(path);
    std::cout << label << ": ok (" << path << ")\n";
  };
  check("manifest", args.manifest, [](const std::string& p) { RecordingBundle::open(p); });
  check("chain", args.chain, [](const std::string& p) { load_chain(p); });
  check("calibration", args.calibration, [](const std::string& p) { load_calibration(p); });
  check("intrinsics", args.intrinsics, [](const std::string& p) { load_intrinsics(p); });
  check("trajectory", args.trajectory, [](const std::string& p) { load_trajectory(p); });
  if (!any) throw ConfigError("validate-config: no files given (see --help)");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline hand-to-robot retargeting: recorded hand landmark + depth streams in, "
               "validated joint-angle trajectories out."};
  app.require_subcommand(1);

  // --- process ---
  ProcessArgs process_args;
  CLI::App* process = app.add_subcommand(
      "process", "Convert a recording into a joint trajectory with a latency sidecar");
  process->add_option("--manifest", process_args.manifest, "Recording manifest (JSON)")
      ->required();
  process->add_option("--out-dir", process_args.out_dir, "Output directory")->required();
  process->add_option("--config", process_args.config_file,
                      "Pipeline config file (JSON); flags override its values");
  auto* chain_opt = process->add_option("--chain", process_args.chain_path, "Chain config file");
  process->add_option("--chain-preset", process_args.chain_preset, "Bundled chain preset")
      ->excludes(chain_opt);
  auto* calib_opt =
      process->add_option("--calibration", process_args.calibration_path, "Calibration file");
  process
      ->add_option("--calibration-preset", process_args.calibration_preset,
                   "Bundled calibration preset")
      ->excludes(calib_opt);
  process->add_option("--gripper-mode", process_args.gripper_mode,
                      "normal | binary | offset:<rad>");
  process->add_option("--handedness", process_args.handedness, "Left | Right");
  process->add_option("--alpha-2d", process_args.alpha_2d, "Landmark smoothing factor");
  process->add_option("--alpha-joints", process_args.alpha_joints, "Joint smoothing factor");
  process->add_option("--z-floor", process_args.z_floor, "Safety floor in metres");
  process->add_option("--ik-max-iterations", process_args.ik_max_iterations, "Solver budget");
  process->add_option("--ik-residual-threshold", process_args.ik_residual_threshold,
                      "Convergence threshold");
  process->add_option("--ik-position-weight", process_args.ik_position_weight, "Position weight");
  process->add_option("--ik-orientation-weight", process_args.ik_orientation_weight,
                      "Orientation weight");
  process->add_option("--ik-step-clamp", process_args.ik_step_clamp, "Per-iteration step bound");
  process->add_flag("-v,--verbose", process_args.verbose, "Print the latency table");

  // --- fk-replay ---
  ReplayArgs replay_args;
  CLI::App* replay = app.add_subcommand(
      "fk-replay", "Validate a trajectory kinematically before deployment");
  replay->add_option("--trajectory", replay_args.trajectory, "Trajectory file (JSONL)")
      ->required();
  auto* replay_chain = replay->add_option("--chain", replay_args.chain_path, "Chain config file");
  replay->add_option("--chain-preset", replay_args.chain_preset, "Bundled chain preset")
      ->excludes(replay_chain);
  replay->add_option("--fps", replay_args.fps, "Replay frame rate for finite differences");
  replay->add_option("--arm-velocity-limit", replay_args.limits.arm_velocity_rad_s, "rad/s");
  replay->add_option("--gripper-velocity-limit", replay_args.limits.gripper_velocity_rad_s,
                     "rad/s");
  replay->add_option("--arm-accel-limit", replay_args.limits.arm_acceleration_rad_s2, "rad/s^2");
  replay->add_option("--gripper-accel-limit", replay_args.limits.gripper_acceleration_rad_s2,
                     "rad/s^2");
  replay->add_option("--z-floor", replay_args.limits.z_floor_m, "End-effector floor in metres");
  replay->add_option("--report", replay_args.report_path, "Write the JSON report here");

  // --- synth ---
  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand(
      "synth", "Generate a synthetic recording with ground-truth targets");
  synth->add_option("--scenario", synth_args.scenario, "static_grasp | line_sweep | grasp_cycle");
  synth->add_option("--frames", synth_args.frames, "Frame count");
  synth->add_option("--fps", synth_args.fps, "Timestamps per second");
  synth->add_option("--out-dir", synth_args.out_dir, "Output directory")->required();
  auto* synth_calib =
      synth->add_option("--calibration", synth_args.calibration_path, "Calibration file");
  synth
      ->add_option("--calibration-preset", synth_args.calibration_preset,
                   "Bundled calibration preset")
      ->excludes(synth_calib);
  synth->add_option("--intrinsics", synth_args.intrinsics_path, "Intrinsics file");
  synth->add_option("--handedness", synth_args.handedness, "Left | Right");

  // --- bench ---
  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "Time the IK solver on random reachable targets");
  auto* bench_chain = bench->add_option("--chain", bench_args.chain_path, "Chain config file");
  bench->add_option("--chain-preset", bench_args.chain_preset, "Bundled chain preset")
      ->excludes(bench_chain);
  bench->add_option("-n,--count", bench_args.count, "Number of solves");
  bench->add_option("--seed", bench_args.seed, "RNG seed");
  bench->add_flag("--json", bench_args.as_json, "Machine-readable output");

  // --- validate-config ---
  ValidateArgs validate_args;
  CLI::App* validate = app.add_subcommand("validate-config", "Parse and cross-check input files");
  validate->add_option("--manifest", validate_args.manifest, "Recording manifest");
  validate->add_option("--chain", validate_args.chain, "Chain config file");
  validate->add_option("--calibration", validate_args.calibration, "Calibration file");
  validate->add_option("--intrinsics", validate_args.intrinsics, "Intrinsics file");
  validate->add_option("--trajectory", validate_args.trajectory, "Trajectory file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (process->parsed()) return run_process(process_args, *process);
    if (replay->parsed()) return run_fk_replay(replay_args);
    if (synth->parsed()) return run_synth(synth_args);
    if (bench->parsed()) return run_bench(bench_args);
    if (validate->parsed()) return run_validate_config(validate_args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitConfigError;
}
