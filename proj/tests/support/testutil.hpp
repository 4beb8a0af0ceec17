#pragma once

#include "handik/kinematics.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <cmath>
#include <random>

namespace handik::test {

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Eigen::Vector3d random_vector(std::mt19937_64& rng, double lo, double hi) {
  return {uniform(rng, lo, hi), uniform(rng, lo, hi), uniform(rng, lo, hi)};
}

inline Eigen::Vector3d random_unit_vector(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Vector3d v;
  do {
    v = {normal(rng), normal(rng), normal(rng)};
  } while (v.norm() < 1e-6);
  return v.normalized();
}

inline Eigen::Quaterniond random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Quaterniond q(normal(rng), normal(rng), normal(rng), normal(rng));
  q.normalize();
  return q;
}

inline Eigen::VectorXd random_in_limits(std::mt19937_64& rng, const KinematicChain& chain) {
  Eigen::VectorXd q(chain.dof());
  for (std::size_t i = 0; i < chain.dof(); ++i) {
    const Joint& j = chain.joint(i);
    q[static_cast<Eigen::Index>(i)] = uniform(rng, j.limit_min_rad, j.limit_max_rad);
  }
  return q;
}

/// Central-difference Jacobian, the independent check for the geometric one.
/// Angular rows come from the rotation vector of the relative rotation
/// between the two perturbed poses.
inline Eigen::MatrixXd finite_difference_jacobian(const KinematicChain& chain,
                                                  const Eigen::VectorXd& q, double h = 1e-6) {
  const auto n = static_cast<Eigen::Index>(chain.dof());
  Eigen::MatrixXd jac(6, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd qp = q;
    Eigen::VectorXd qm = q;
    qp[i] += h;
    qm[i] -= h;
    const Pose pp = forward_kinematics(chain, qp);
    const Pose pm = forward_kinematics(chain, qm);
    jac.block<3, 1>(0, i) = (pp.position - pm.position) / (2.0 * h);
    const Eigen::Matrix3d rel =
        pp.orientation.toRotationMatrix() * pm.orientation.toRotationMatrix().transpose();
    const Eigen::AngleAxisd aa(rel);
    jac.block<3, 1>(3, i) = aa.angle() * aa.axis() / (2.0 * h);
  }
  return jac;
}

/// Rotation-matrix-to-quaternion via the axis-angle route: an independent
/// path from the branch-selection conversion used by the library.
inline Eigen::Quaterniond quaternion_oracle(const Eigen::Matrix3d& rot) {
  const double cos_angle = std::clamp((rot.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double angle = std::acos(cos_angle);
  if (angle < 1e-12) return Eigen::Quaterniond::Identity();
  Eigen::Vector3d axis;
  if (std::abs(angle - M_PI) < 1e-6) {
    // Near 180 degrees the skew part vanishes; recover the axis from the
    // symmetric part instead.
    const Eigen::Matrix3d sym = 0.5 * (rot + Eigen::Matrix3d::Identity());
    int k = 0;
    sym.diagonal().maxCoeff(&k);
    axis = sym.col(k) / std::sqrt(sym(k, k));
  } else {
    axis = Eigen::Vector3d(rot(2, 1) - rot(1, 2), rot(0, 2) - rot(2, 0), rot(1, 0) - rot(0, 1)) /
           (2.0 * std::sin(angle));
  }
  axis.normalize();
  Eigen::Quaterniond q(Eigen::AngleAxisd(angle, axis));
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  return q;
}

/// Absolute rotation distance between two unit quaternions, in radians.
inline double quaternion_angle(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  return a.angularDistance(b);
}

}  // namespace handik::test
