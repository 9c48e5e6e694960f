#pragma once

#include <stdexcept>

#include "vicsim/dynamics.hpp"
#include "vicsim/math.hpp"

namespace vicsim {

struct Reference {
  Vec3 pos_ref = Vec3::Zero();
  Vec3 vel_ref = Vec3::Zero();
  Vec3 acc_ref = Vec3::Zero();
  Quat att_ref = Quat::Identity();
  Vec3 ang_vel_ref = Vec3::Zero();
};

// First-order low-pass with unit DC gain.
class LowPass {
 public:
  LowPass() = default;
  explicit LowPass(int dim, double alpha) : alpha_(alpha), state_(VecX::Zero(dim)) {
    if (!(alpha > 0.0) || alpha > 1.0) throw std::invalid_argument("LowPass: alpha in (0,1]");
  }
  static double alpha_for_cutoff(double f_hz, double dt) {
    return 1.0 - std::exp(-2.0 * M_PI * f_hz * dt);
  }

  const VecX& step(const VecX& x) {
    if (!x.allFinite()) throw std::invalid_argument("LowPass: non-finite input");
    state_ += alpha_ * (x - state_);
    return state_;
  }
  double step1(double x) {
    VecX v(1);
    v << x;
    return step(v)(0);
  }
  void reset(const VecX& x0) { state_ = x0; }
  const VecX& state() const { return state_; }
  double alpha() const { return alpha_; }

 private:
  double alpha_ = 1.0;
  VecX state_ = VecX::Zero(1);
};

inline double lowpass_step(LowPass& f, double x) { return f.step1(x); }

// Bounded, slew-limited diagonal stiffness gains. Axis order:
// [trans x, trans y, trans z, rot x, rot y, rot z].
struct GainSchedule {
  Vec6 k_min = (Vec6() << 20, 20, 20, 2, 2, 2).finished();
  Vec6 k_max = (Vec6() << 200, 200, 200, 20, 20, 20).finished();
  double zeta = 0.7;
  Vec6 slew_rate = (Vec6() << 360, 360, 360, 36, 36, 36).finished();  // gain units / s
  Vec6 k_current = (Vec6() << 20, 20, 20, 2, 2, 2).finished();

  void validate() const {
    for (int i = 0; i < 6; ++i) {
      if (!(k_min(i) >= 0.0) || !(k_max(i) >= k_min(i)) || !(slew_rate(i) >= 0.0))
        throw std::invalid_argument("GainSchedule: need 0 <= k_min <= k_max, slew_rate >= 0");
    }
  }

  Vec6 target_for_action(const Vec6& action) const {
    for (int i = 0; i < 6; ++i)
      if (!(action(i) > 0.0 && action(i) < 1.0))
        throw std::invalid_argument("GainSchedule: action must be in (0,1)");
    return k_min + (k_max - k_min).cwiseProduct(action);
  }

  // Initialize k_current at the action's target, bypassing the slew limit.
  void reset(const Vec6& action) { k_current = target_for_action(action); }
};

inline Vec6 adaptive_stiffness(const Vec6& action, GainSchedule& sched, double dt) {
  const Vec6 target = sched.target_for_action(action);
  const Vec6 max_delta = sched.slew_rate * dt;
  const Vec6 delta = (target - sched.k_current).cwiseMax(-max_delta).cwiseMin(max_delta);
  sched.k_current += delta;
  return sched.k_current;
}

inline Vec6 damping_from_stiffness(const Vec6& k, double zeta) {
  for (int i = 0; i < 6; ++i)
    if (k(i) < 0.0) throw std::invalid_argument("damping_from_stiffness: k must be >= 0");
  return 2.0 * zeta * k.cwiseSqrt();
}

inline void tracking_errors(const RobotState& state, const Reference& ref, Vec6& e_s, Vec6& e_v) {
  e_s.head<3>() = state.position - ref.pos_ref;
  e_s.tail<3>() = attitude_error(state.orientation, ref.att_ref);
  e_v.head<3>() = state.lin_vel - ref.vel_ref;
  const Mat3 r = state.rotation();
  const Mat3 rd = ref.att_ref.toRotationMatrix();
  e_v.tail<3>() = state.ang_vel - r.transpose() * rd * ref.ang_vel_ref;
}

// Impedance wrench command: feedforward + gravity and gyroscopic compensation
// minus spring-damper error terms. Returned in body frame (actuator convention).
inline Wrench impedance_command(const RobotState& state, const Reference& ref, const Vec6& k,
                                const Vec6& d, const BodyParams& params) {
  Vec6 e_s, e_v;
  tracking_errors(state, ref, e_s, e_v);

  const Vec3 f_world = params.mass * ref.acc_ref +
                       Vec3(0.0, 0.0, params.mass * params.gravity) -
                       k.head<3>().cwiseProduct(e_s.head<3>()) -
                       d.head<3>().cwiseProduct(e_v.head<3>());
  const Vec3 tau_body = state.ang_vel.cross(params.inertia * state.ang_vel) -
                        k.tail<3>().cwiseProduct(e_s.tail<3>()) -
                        d.tail<3>().cwiseProduct(e_v.tail<3>());

  const Mat3 r = state.rotation();
  return Wrench{r.transpose() * f_world, tau_body, Frame::Body};
}

}  // namespace vicsim
