#pragma once

#include "handik/retarget.hpp"
#include "handik/types.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <optional>
#include <string>
#include <vector>

namespace handik {

struct LengthMismatch : Error {
  using Error::Error;
};

/// One revolute joint: a fixed transform from the parent frame to the joint
/// frame, a unit rotation axis expressed in that frame, angle limits and a
/// damping value consumed by the IK solver.
struct Joint {
  std::string name;
  Eigen::Isometry3d origin = Eigen::Isometry3d::Identity();
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  double limit_min_rad = -3.14159265358979323846;
  double limit_max_rad = 3.14159265358979323846;
  double damping = 0.001;
};

/// Serial chain of revolute joints plus a fixed end-effector transform.
class KinematicChain {
 public:
  /// Validates the model: at least one joint, unit axes (within 1e-12) and
  /// min < max limits. Throws ConfigError otherwise.
  KinematicChain(std::vector<Joint> joints, Eigen::Isometry3d end_effector);

  std::size_t dof() const { return joints_.size(); }
  const std::vector<Joint>& joints() const { return joints_; }
  const Joint& joint(std::size_t i) const { return joints_[i]; }
  const Eigen::Isometry3d& end_effector() const { return end_effector_; }

  Eigen::VectorXd mid_range() const;
  Eigen::VectorXd lower_limits() const;
  Eigen::VectorXd upper_limits() const;
  Eigen::VectorXd clamp_to_limits(Eigen::VectorXd q) const;
  bool within_limits(const Eigen::VectorXd& q, double tol = 1e-9) const;

 private:
  std::vector<Joint> joints_;
  Eigen::Isometry3d end_effector_;
};

struct Pose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
};

/// Damped-least-squares solver parameters.
struct IkParams {
  int max_iterations = 100;
  double residual_threshold = 1e-4;
  double position_weight = 1.0;
  double orientation_weight = 0.5;
  double step_clamp_rad = 0.2;  ///< per-joint per-iteration step bound

  void validate() const;  // throws ConfigError
};

struct IkReport {
  int iterations = 0;
  double final_residual = 0.0;
  bool converged = false;
};

struct IkResult {
  Eigen::VectorXd q;
  IkReport report;
};

/// Composes origin_i * Rot(axis_i, q_i) over the chain, then the fixed
/// end-effector transform. Throws LengthMismatch if q does not match the
/// chain's joint count.
Pose forward_kinematics(const KinematicChain& chain, const Eigen::VectorXd& q);

/// Geometric Jacobian at configuration q: column i is
/// [z_i x (p_ee - p_i); z_i] with z_i the world-frame joint axis and p_i the
/// joint origin. Linear rows in m/rad, angular rows in rad/rad.
Eigen::Matrix<double, 6, Eigen::Dynamic> jacobian(const KinematicChain& chain,
                                                  const Eigen::VectorXd& q);

/// Iterative damped least squares biased toward a rest configuration.
///
/// Each step solves (J^T W J + L^2) dq = J^T W e - L^2 (q - rest) where e is
/// the 6-vector pose error (position difference; orientation as the rotation
/// vector of R_target * R_current^T), W broadcasts the position/orientation
/// weights over their rows and L = diag(max(damping_i, 0.001)). Steps are
/// clamped per joint to +-step_clamp_rad and iterates are clamped to the
/// joint limits, so the returned configuration is always feasible. Stops when
/// the weighted residual ||W^(1/2) e|| drops below residual_threshold or the
/// iteration budget runs out; non-convergence is reported, never thrown.
IkResult solve_ik(const KinematicChain& chain, const TargetPose& target,
                  const Eigen::VectorXd& rest, const IkParams& params = {});

/// First-order low-pass in joint space; the first sample passes through.
Eigen::VectorXd ema_smooth_joints(const std::optional<Eigen::VectorXd>& prev,
                                  const Eigen::VectorXd& raw, double alpha = 0.5);

enum class SafetyCheck { Ok, Rejected };

/// Rejects targets below the ground-plane floor: z < z_floor_m.
SafetyCheck safety_check(const TargetPose& target, double z_floor_m = 0.05);

}  // namespace handik
