#include "handik/kinematics.hpp"

#include <cassert>
#include <cmath>
#include <sstream>

namespace handik {

namespace {

constexpr double kMinDamping = 0.001;

void check_length(const KinematicChain& chain, const Eigen::VectorXd& q, const char* where) {
  if (static_cast<std::size_t>(q.size()) != chain.dof()) {
    std::ostringstream msg;
    msg << where << ": joint vector has " << q.size() << " entries, chain has " << chain.dof();
    throw LengthMismatch(msg.str());
  }
}

/// World-frame rotation vector of R_target * R_current^T.
Eigen::Vector3d orientation_error(const Eigen::Quaterniond& target,
                                  const Eigen::Quaterniond& current) {
  const Eigen::Matrix3d rel = target.toRotationMatrix() * current.toRotationMatrix().transpose();
  const Eigen::AngleAxisd aa(rel);
  return aa.angle() * aa.axis();
}

}  // namespace

KinematicChain::KinematicChain(std::vector<Joint> joints, Eigen::Isometry3d end_effector)
    : joints_(std::move(joints)), end_effector_(std::move(end_effector)) {
  if (joints_.empty()) throw ConfigError("chain: needs at least one joint");
  for (const Joint& j : joints_) {
    if (std::abs(j.axis.norm() - 1.0) > 1e-12) {
      throw ConfigError("chain: joint '" + j.name + "' axis is not unit length");
    }
    if (!(j.limit_min_rad < j.limit_max_rad)) {
      throw ConfigError("chain: joint '" + j.name + "' has empty limit range");
    }
    if (j.damping < 0.0) {
      throw ConfigError("chain: joint '" + j.name + "' has negative damping");
    }
  }
}

Eigen::VectorXd KinematicChain::mid_range() const {
  Eigen::VectorXd q(dof());
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    q[static_cast<Eigen::Index>(i)] = 0.5 * (joints_[i].limit_min_rad + joints_[i].limit_max_rad);
  }
  return q;
}

Eigen::VectorXd KinematicChain::lower_limits() const {
  Eigen::VectorXd q(dof());
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    q[static_cast<Eigen::Index>(i)] = joints_[i].limit_min_rad;
  }
  return q;
}

Eigen::VectorXd KinematicChain::upper_limits() const {
  Eigen::VectorXd q(dof());
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    q[static_cast<Eigen::Index>(i)] = joints_[i].limit_max_rad;
  }
  return q;
}

Eigen::VectorXd KinematicChain::clamp_to_limits(Eigen::VectorXd q) const {
  check_length(*this, q, "clamp_to_limits");
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    auto& v = q[static_cast<Eigen::Index>(i)];
    v = std::clamp(v, joints_[i].limit_min_rad, joints_[i].limit_max_rad);
  }
  return q;
}

bool KinematicChain::within_limits(const Eigen::VectorXd& q, double tol) const {
  check_length(*this, q, "within_limits");
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    const double v = q[static_cast<Eigen::Index>(i)];
    if (v < joints_[i].limit_min_rad - tol || v > joints_[i].limit_max_rad + tol) return false;
  }
  return true;
}

void IkParams::validate() const {
  if (max_iterations < 1) throw ConfigError("ik: max_iterations must be >= 1");
  if (!(residual_threshold > 0.0)) throw ConfigError("ik: residual_threshold must be positive");
  if (!(position_weight >= 0.0) || !(orientation_weight >= 0.0)) {
    throw ConfigError("ik: weights must be non-negative");
  }
  if (!(step_clamp_rad > 0.0)) throw ConfigError("ik: step_clamp_rad must be positive");
}

Pose forward_kinematics(const KinematicChain& chain, const Eigen::VectorXd& q) {
  check_length(chain, q, "forward_kinematics");
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  for (std::size_t i = 0; i < chain.dof(); ++i) {
    const Joint& j = chain.joint(i);
    t = t * j.origin * Eigen::AngleAxisd(q[static_cast<Eigen::Index>(i)], j.axis);
  }
  t = t * chain.end_effector();
  Pose pose;
  pose.position = t.translation();
  pose.orientation = Eigen::Quaterniond(t.rotation()).normalized();
  return pose;
}

Eigen::Matrix<double, 6, Eigen::Dynamic> jacobian(const KinematicChain& chain,
                                                  const Eigen::VectorXd& q) {
  check_length(chain, q, "jacobian");
  const auto n = static_cast<Eigen::Index>(chain.dof());

  std::vector<Eigen::Vector3d> axes(chain.dof());
  std::vector<Eigen::Vector3d> origins(chain.dof());
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  for (std::size_t i = 0; i < chain.dof(); ++i) {
    const Joint& j = chain.joint(i);
    t = t * j.origin;  // joint frame before its own rotation
    origins[i] = t.translation();
    axes[i] = t.rotation() * j.axis;  // rotating about the axis keeps it fixed
    t = t * Eigen::AngleAxisd(q[static_cast<Eigen::Index>(i)], j.axis);
  }
  const Eigen::Vector3d p_ee = (t * chain.end_effector()).translation();

  Eigen::Matrix<double, 6, Eigen::Dynamic> jac(6, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    jac.block<3, 1>(0, i) = axes[idx].cross(p_ee - origins[idx]);
    jac.block<3, 1>(3, i) = axes[idx];
  }
  return jac;
}

IkResult solve_ik(const KinematicChain& chain, const TargetPose& target,
                  const Eigen::VectorXd& rest, const IkParams& params) {
  check_length(chain, rest, "solve_ik");
  params.validate();
  assert(target.position.frame == Frame::Robot);

  const auto n = static_cast<Eigen::Index>(chain.dof());

  Eigen::Matrix<double, 6, 1> w;
  w << params.position_weight, params.position_weight, params.position_weight,
      params.orientation_weight, params.orientation_weight, params.orientation_weight;

  Eigen::VectorXd damping_sq(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lambda = std::max(chain.joint(static_cast<std::size_t>(i)).damping, kMinDamping);
    damping_sq[i] = lambda * lambda;
  }

  Eigen::VectorXd q = chain.clamp_to_limits(rest);

  auto pose_error = [&](const Eigen::VectorXd& at) {
    const Pose pose = forward_kinematics(chain, at);
    Eigen::Matrix<double, 6, 1> e;
    e.head<3>() = target.position.xyz - pose.position;
    e.tail<3>() = orientation_error(target.orientation, pose.orientation);
    return e;
  };
  auto weighted_norm = [&](const Eigen::Matrix<double, 6, 1>& e) {
    return std::sqrt((w.array() * e.array().square()).sum());
  };

  Eigen::Matrix<double, 6, 1> e = pose_error(q);
  double residual = weighted_norm(e);

  IkReport report;
  while (residual >= params.residual_threshold && report.iterations < params.max_iterations) {
    const auto jac = jacobian(chain, q);
    const Eigen::MatrixXd jtw = jac.transpose() * w.asDiagonal();
    Eigen::MatrixXd lhs = jtw * jac;
    lhs.diagonal() += damping_sq;
    const Eigen::VectorXd rhs = jtw * e - damping_sq.asDiagonal() * (q - rest);

    Eigen::VectorXd dq = lhs.ldlt().solve(rhs);
    dq = dq.cwiseMax(-params.step_clamp_rad).cwiseMin(params.step_clamp_rad);

    q = chain.clamp_to_limits(q + dq);
    ++report.iterations;

    e = pose_error(q);
    residual = weighted_norm(e);
  }

  report.final_residual = residual;
  report.converged = residual < params.residual_threshold;
  return {std::move(q), report};
}

Eigen::VectorXd ema_smooth_joints(const std::optional<Eigen::VectorXd>& prev,
                                  const Eigen::VectorXd& raw, double alpha) {
  if (!prev) return raw;
  if (prev->size() != raw.size()) {
    std::ostringstream msg;
    msg << "ema_smooth_joints: sizes differ (" << prev->size() << " vs " << raw.size() << ")";
    throw LengthMismatch(msg.str());
  }
  return alpha * raw + (1.0 - alpha) * *prev;
}

SafetyCheck safety_check(const TargetPose& target, double z_floor_m) {
  assert(target.position.frame == Frame::Robot);
  return target.position.z() < z_floor_m ? SafetyCheck::Rejected : SafetyCheck::Ok;
}

}  // namespace handik
