#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <cmath>
#include <cstdint>
#include <random>

namespace vicsim {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using VecX = Eigen::VectorXd;
using Mat3 = Eigen::Matrix3d;
using MatX = Eigen::MatrixXd;
using Quat = Eigen::Quaterniond;

using Rng = std::mt19937_64;

// Deterministic per-stream seeding (splitmix64 mix).
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Vec3 clamp_componentwise(const Vec3& v, const Vec3& limit) {
  return v.cwiseMax(-limit).cwiseMin(limit);
}

// Quaternion exponential map: rotation vector (body rates * dt) to unit quaternion.
inline Quat quat_exp(const Vec3& phi) {
  const double angle = phi.norm();
  if (angle < 1e-12) {
    Quat q(1.0, 0.5 * phi.x(), 0.5 * phi.y(), 0.5 * phi.z());
    q.normalize();
    return q;
  }
  const Vec3 axis = phi / angle;
  const double half = 0.5 * angle;
  const double s = std::sin(half);
  return Quat(std::cos(half), s * axis.x(), s * axis.y(), s * axis.z());
}

inline Vec3 so3_vee(const Mat3& m) {
  return Vec3(m(2, 1), m(0, 2), m(1, 0));
}

// Rotation error vee(0.5 * (Rd^T R - R^T Rd)), body frame.
inline Vec3 attitude_error(const Quat& q, const Quat& q_ref) {
  const Mat3 r = q.toRotationMatrix();
  const Mat3 rd = q_ref.toRotationMatrix();
  const Mat3 e = 0.5 * (rd.transpose() * r - r.transpose() * rd);
  return so3_vee(e);
}

inline bool all_finite(const VecX& v) { return v.allFinite(); }

inline double smoothstep01(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

}  // namespace vicsim
