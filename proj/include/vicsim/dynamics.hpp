#pragma once

#include <deque>
#include <stdexcept>

#include "vicsim/math.hpp"

namespace vicsim {

enum class Frame { World, Body };

struct Wrench {
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
  Frame frame = Frame::Body;

  static Wrench zero(Frame f = Frame::Body) { return Wrench{Vec3::Zero(), Vec3::Zero(), f}; }
  bool finite() const { return force.allFinite() && torque.allFinite(); }
};

struct BodyParams {
  double mass = 4.5;                      // kg
  Mat3 inertia = Mat3::Identity() * 0.25; // kg m^2, body frame
  Vec3 r_com = Vec3::Zero();              // m, body frame
  Vec3 r_end = Vec3(0.45, 0.0, 0.0);      // m, body frame, end-effector tip
  double gravity = 9.81;                  // m/s^2

  void validate() const {
    if (!(mass > 0.0)) throw std::invalid_argument("BodyParams: mass must be > 0");
    if ((inertia - inertia.transpose()).cwiseAbs().maxCoeff() >= 1e-12)
      throw std::invalid_argument("BodyParams: inertia must be symmetric");
    Eigen::SelfAdjointEigenSolver<Mat3> es(inertia);
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw std::invalid_argument("BodyParams: inertia must be positive definite");
    if ((r_end - r_com).norm() <= 0.0)
      throw std::invalid_argument("BodyParams: lever arm |r_end - r_com| must be > 0");
  }

  double lever_arm() const { return (r_end - r_com).norm(); }
};

struct RobotState {
  Vec3 position = Vec3::Zero();   // m, world
  Quat orientation = Quat::Identity(); // world <- body
  Vec3 lin_vel = Vec3::Zero();    // m/s, world
  Vec3 ang_vel = Vec3::Zero();    // rad/s, body

  Mat3 rotation() const { return orientation.toRotationMatrix(); }
  Vec3 tip_position(const BodyParams& p) const { return position + rotation() * p.r_end; }
  Vec3 tip_velocity(const BodyParams& p) const {
    return lin_vel + rotation() * ang_vel.cross(p.r_end - p.r_com);
  }
  bool finite() const {
    return position.allFinite() && lin_vel.allFinite() && ang_vel.allFinite() &&
           std::isfinite(orientation.w()) && orientation.vec().allFinite();
  }
};

// Collective actuator process: componentwise saturation at enqueue, fixed FIFO delay.
class ActuatorModel {
 public:
  ActuatorModel() { reset(); }
  ActuatorModel(const Vec3& force_limit, const Vec3& torque_limit, int delay_steps)
      : force_limit_(force_limit), torque_limit_(torque_limit), delay_steps_(delay_steps) {
    if (delay_steps < 0) throw std::invalid_argument("ActuatorModel: delay_steps must be >= 0");
    reset();
  }

  void reset() {
    buffer_.assign(static_cast<std::size_t>(delay_steps_), Wrench::zero(Frame::Body));
  }

  Wrench saturate(const Wrench& w) const {
    Wrench out = w;
    out.force = clamp_componentwise(w.force, force_limit_);
    out.torque = clamp_componentwise(w.torque, torque_limit_);
    return out;
  }

  // Enqueue saturate(command); return the wrench enqueued delay_steps earlier.
  Wrench apply(const Wrench& command) {
    if (command.frame != Frame::Body)
      throw std::invalid_argument("ActuatorModel: command must be body frame");
    const Wrench sat = saturate(command);
    if (delay_steps_ == 0) return sat;
    buffer_.push_back(sat);
    Wrench out = buffer_.front();
    buffer_.pop_front();
    return out;
  }

  int delay_steps() const { return delay_steps_; }
  const Vec3& force_limit() const { return force_limit_; }
  const Vec3& torque_limit() const { return torque_limit_; }

 private:
  Vec3 force_limit_ = Vec3(20.0, 20.0, 64.145);
  Vec3 torque_limit_ = Vec3(5.0, 5.0, 5.0);
  int delay_steps_ = 8;
  std::deque<Wrench> buffer_;
};

inline Wrench gravity_wrench(const BodyParams& p, const RobotState&) {
  return Wrench{Vec3(0.0, 0.0, -p.mass * p.gravity), Vec3::Zero(), Frame::World};
}

inline Wrench gyroscopic_wrench(const BodyParams& p, const RobotState& s) {
  return Wrench{Vec3::Zero(), -s.ang_vel.cross(p.inertia * s.ang_vel), Frame::Body};
}

struct DynamicsFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Semi-implicit Euler step of the rigid-body dynamics. Translational states in world
// frame, rotational in body frame; gravity and gyroscopic terms applied internally.
inline RobotState step_dynamics(const RobotState& state, const BodyParams& p,
                                const Wrench& w_act, const Wrench& w_dist, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_dynamics: dt must be > 0");
  if (!state.finite() || !w_act.finite() || !w_dist.finite())
    throw DynamicsFault("step_dynamics: non-finite state or wrench");

  const Mat3 r = state.rotation();
  auto resolve_force_world = [&](const Wrench& w) {
    return w.frame == Frame::World ? w.force : Vec3(r * w.force);
  };
  auto resolve_torque_body = [&](const Wrench& w) {
    return w.frame == Frame::Body ? w.torque : Vec3(r.transpose() * w.torque);
  };

  const Vec3 f_world = resolve_force_world(w_act) + resolve_force_world(w_dist) +
                       Vec3(0.0, 0.0, -p.mass * p.gravity);
  const Vec3 tau_body = resolve_torque_body(w_act) + resolve_torque_body(w_dist) -
                        state.ang_vel.cross(p.inertia * state.ang_vel);

  RobotState next = state;
  next.lin_vel = state.lin_vel + dt * f_world / p.mass;
  next.ang_vel = state.ang_vel + dt * p.inertia.ldlt().solve(tau_body);
  next.position = state.position + dt * next.lin_vel;
  next.orientation = state.orientation * quat_exp(next.ang_vel * dt);
  next.orientation.normalize();

  if (!next.finite()) throw DynamicsFault("step_dynamics: non-finite result");
  return next;
}

}  // namespace vicsim
