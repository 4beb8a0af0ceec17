#include "handik/geometry.hpp"
#include "handik/kinematics.hpp"
#include "handik/presets.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace handik;

namespace {

Eigen::VectorXd random_q(std::mt19937_64& rng, const KinematicChain& chain) {
  Eigen::VectorXd q(chain.dof());
  for (std::size_t i = 0; i < chain.dof(); ++i) {
    std::uniform_real_distribution<double> u(chain.joint(i).limit_min_rad,
                                             chain.joint(i).limit_max_rad);
    q[static_cast<Eigen::Index>(i)] = u(rng);
  }
  return q;
}

void BM_ForwardKinematics(benchmark::State& state) {
  const auto chain = presets::so101_chain();
  std::mt19937_64 rng(1);
  const Eigen::VectorXd q = random_q(rng, chain);
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward_kinematics(chain, q));
  }
}
BENCHMARK(BM_ForwardKinematics);

void BM_Jacobian(benchmark::State& state) {
  const auto chain = presets::so101_chain();
  std::mt19937_64 rng(2);
  const Eigen::VectorXd q = random_q(rng, chain);
  for (auto _ : state) {
    benchmark::DoNotOptimize(jacobian(chain, q));
  }
}
BENCHMARK(BM_Jacobian);

void BM_SolveIk(benchmark::State& state) {
  const auto chain = presets::so101_chain();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> noise(-0.1, 0.1);
  for (auto _ : state) {
    state.PauseTiming();
    const Eigen::VectorXd q_goal = random_q(rng, chain);
    Eigen::VectorXd rest = q_goal;
    for (Eigen::Index i = 0; i < rest.size(); ++i) rest[i] += noise(rng);
    rest = chain.clamp_to_limits(rest);
    const Pose goal = forward_kinematics(chain, q_goal);
    TargetPose target;
    target.position = robot_point(goal.position);
    target.orientation = goal.orientation;
    state.ResumeTiming();
    benchmark::DoNotOptimize(solve_ik(chain, target, rest));
  }
}
BENCHMARK(BM_SolveIk);

void BM_Deproject(benchmark::State& state) {
  const auto k = presets::vga_intrinsics();
  DepthFrame d;
  d.width = k.width;
  d.height = k.height;
  d.raster.assign(static_cast<std::size_t>(d.width) * d.height, 350);
  for (auto _ : state) {
    benchmark::DoNotOptimize(deproject(411.7, 215.2, d, k));
  }
}
BENCHMARK(BM_Deproject);

void BM_CameraToRobot(benchmark::State& state) {
  const auto c = presets::egocentric_calibration();
  const Point3 p = camera_point(0.05, 0.21, 0.35);
  for (auto _ : state) {
    benchmark::DoNotOptimize(camera_to_robot(p, c));
  }
}
BENCHMARK(BM_CameraToRobot);

}  // namespace

BENCHMARK_MAIN();
