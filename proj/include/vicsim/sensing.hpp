#pragma once

#include "vicsim/dynamics.hpp"
#include "vicsim/math.hpp"
#include "vicsim/terrain.hpp"

namespace vicsim {

struct SensorModel {
  Vec6 wrench_noise_std = Vec6::Zero();       // N / N m, white
  Vec6 wrench_bias_walk_std = Vec6::Zero();   // per sqrt(s)
  double pos_noise_std = 0.0;                 // m
  double vel_noise_std = 0.0;                 // m/s
  double att_noise_std = 0.0;                 // rad (small-angle)
  double ang_vel_noise_std = 0.0;             // rad/s
  bool wrench_enabled = false;
  bool state_enabled = false;

  void validate() const {
    if (wrench_noise_std.minCoeff() < 0.0 || wrench_bias_walk_std.minCoeff() < 0.0 ||
        pos_noise_std < 0.0 || vel_noise_std < 0.0 || att_noise_std < 0.0 ||
        ang_vel_noise_std < 0.0)
      throw std::invalid_argument("SensorModel: noise std must be >= 0");
  }
};

// Measurement channel between simulation ground truth and the controller/policy.
// Read-only tap: never mutates the true state. Bias is a per-instance random walk.
class SensorRig {
 public:
  SensorRig() = default;
  SensorRig(const SensorModel& model, std::uint64_t seed) : model_(model), rng_(seed) {
    model_.validate();
  }

  void reset(std::uint64_t seed) {
    rng_.seed(seed);
    bias_ = Vec6::Zero();
  }

  Wrench measure_wrench(const ContactResult& truth, double dt) {
    Wrench w = truth.wrench_body;
    if (!model_.wrench_enabled) return w;
    std::normal_distribution<double> n01(0.0, 1.0);
    const double sq = std::sqrt(dt);
    for (int i = 0; i < 6; ++i) bias_(i) += model_.wrench_bias_walk_std(i) * sq * n01(rng_);
    Vec6 noise;
    for (int i = 0; i < 6; ++i) noise(i) = model_.wrench_noise_std(i) * n01(rng_);
    w.force += bias_.head<3>() + noise.head<3>();
    w.torque += bias_.tail<3>() + noise.tail<3>();
    return w;
  }

  RobotState measure_state(const RobotState& truth) {
    if (!model_.state_enabled) return truth;
    std::normal_distribution<double> n01(0.0, 1.0);
    RobotState m = truth;
    for (int i = 0; i < 3; ++i) {
      m.position(i) += model_.pos_noise_std * n01(rng_);
      m.lin_vel(i) += model_.vel_noise_std * n01(rng_);
      m.ang_vel(i) += model_.ang_vel_noise_std * n01(rng_);
    }
    Vec3 dtheta;
    for (int i = 0; i < 3; ++i) dtheta(i) = model_.att_noise_std * n01(rng_);
    m.orientation = truth.orientation * quat_exp(dtheta);
    m.orientation.normalize();
    return m;
  }

  const Vec6& bias() const { return bias_; }
  const SensorModel& model() const { return model_; }

 private:
  SensorModel model_;
  Rng rng_{0};
  Vec6 bias_ = Vec6::Zero();
};

}  // namespace vicsim
