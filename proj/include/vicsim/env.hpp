#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "vicsim/control.hpp"
#include "vicsim/dynamics.hpp"
#include "vicsim/reward.hpp"
#include "vicsim/scenarios.hpp"
#include "vicsim/sensing.hpp"
#include "vicsim/terrain.hpp"

namespace vicsim {

struct ActuatorConfig {
  Vec3 force_limit = Vec3(20.0, 20.0, 64.145);  // N (z sized for hover + margin)
  Vec3 torque_limit = Vec3(5.0, 5.0, 5.0);      // N m
  int delay_steps = 8;                          // physics steps (20 ms at 400 Hz)
};

struct Rates {
  double dt = 0.0025;     // s, physics
  int control_every = 4;  // physics steps per control update (100 Hz)
  int policy_every = 20;  // physics steps per policy update (20 Hz)

  double control_dt() const { return dt * control_every; }
  double policy_dt() const { return dt * policy_every; }
  void validate() const {
    if (!(dt > 0.0) || control_every < 1 || policy_every < 1 ||
        policy_every % control_every != 0)
      throw std::invalid_argument("Rates: physics | control | policy must divide");
  }
};

struct GainConfig {
  GainSchedule schedule;
  std::vector<int> adapted_axes = {0, 4};  // trans normal (x), rot pitch (y)
  // Action for non-adapted axes and for the approach phase hold.
  Vec6 base_action = (Vec6() << 0.5556, 0.5556, 0.5556, 0.7222, 0.7222, 0.7222).finished();
  // Constant-gain baseline (high stiffness on the adapted axes).
  Vec6 baseline_action = (Vec6() << 0.889, 0.5556, 0.5556, 0.7222, 0.889, 0.7222).finished();
  double output_cutoff_hz = 2.0;  // policy output filter

  int action_dim() const { return int(adapted_axes.size()); }
};

struct FilterConfig {
  double pitch_rate_cutoff_hz = 4.0;
  double force_cutoff_hz = 4.0;
};

struct InstanceConfig {
  BodyParams body;
  ActuatorConfig actuator;
  ContactParams contact;
  GainConfig gains;
  Rates rates;
  SensorModel sensors;
  RewardWeights reward;
  ScenarioSpec scenario;
  FilterConfig filters;
  double fault_tilt_deg = 60.0;

  void validate() const {
    body.validate();
    contact.validate();
    gains.schedule.validate();
    rates.validate();
    sensors.validate();
    reward.validate();
    scenario.validate();
  }
};

// Feature order: [filtered pitch rate, pitch error, position error along the
// interaction normal, linear velocity along the slide direction, filtered
// friction force, filtered normal force].
using FeatureVector = Vec6;

struct LogRow {
  double t = 0.0;
  Vec3 pos = Vec3::Zero();
  Quat quat = Quat::Identity();
  Vec3 ref_pos = Vec3::Zero();
  Vec3 e_p = Vec3::Zero();
  Vec3 e_R = Vec3::Zero();
  double pitch = 0.0;
  double pitch_rate = 0.0;
  double tilt = 0.0;  // angle between body z and reference z
  Vec6 gains = Vec6::Zero();
  Vec6 action = Vec6::Zero();  // filtered full-axis action
  double F_perp = 0.0, F_par = 0.0;
  double meas_F_perp = 0.0, meas_F_par = 0.0;
  bool in_contact = false;
  double separation = 0.0;
  RewardTerms reward;
  bool fault = false;
};

// One closed-loop simulation instance: rigid body + actuator process + contact +
// variable impedance controller + sensor models. Single-threaded, deterministic
// given its seed.
class SimInstance {
 public:
  SimInstance(InstanceConfig cfg, Terrain terrain, std::uint64_t seed)
      : cfg_(std::move(cfg)),
        terrain_(std::move(terrain)),
        traj_(cfg_.scenario.trajectory, cfg_.body.r_end),
        seed_(seed) {
    cfg_.validate();
    reset();
  }

  void reset() {
    const Reference r0 = traj_.at(0.0);
    state_ = RobotState{};
    state_.position = r0.pos_ref;
    state_.orientation = r0.att_ref;
    actuator_ = ActuatorModel(cfg_.actuator.force_limit, cfg_.actuator.torque_limit,
                              cfg_.actuator.delay_steps);
    sensors_ = SensorRig(cfg_.sensors, mix_seed(seed_, 0xfeed));
    sched_ = cfg_.gains.schedule;
    hold_action_ = project_action(cfg_.gains.base_action);
    raw_action_ = hold_action_;
    prev_raw_action_ = hold_action_;
    action6_ = cfg_.gains.base_action;
    sched_.reset(action6_);
    const double cdt = cfg_.rates.control_dt();
    pitch_rate_filter_ = LowPass(1, LowPass::alpha_for_cutoff(cfg_.filters.pitch_rate_cutoff_hz, cdt));
    force_filter_ = LowPass(2, LowPass::alpha_for_cutoff(cfg_.filters.force_cutoff_hz, cdt));
    output_filter_ = LowPass(cfg_.gains.action_dim(),
                             LowPass::alpha_for_cutoff(cfg_.gains.output_cutoff_hz,
                                                       cfg_.rates.policy_dt()));
    output_filter_.reset(hold_action_);
    step_index_ = 0;
    fault_ = false;
    done_ = false;
    contact_ = ContactResult{};
    meas_wrench_ = Wrench::zero(Frame::Body);
    features_.setZero();
    held_cmd_ = Wrench::zero(Frame::Body);
    log_.clear();
  }

  double time() const { return double(step_index_) * cfg_.rates.dt; }
  bool slide_active() const { return time() >= traj_.slide_start() && !done_; }
  bool done() const { return done_; }
  bool fault() const { return fault_; }
  int policy_steps_per_slide() const {
    return int(std::lround(cfg_.scenario.trajectory.slide_duration / cfg_.rates.policy_dt()));
  }

  // Advance through the approach phase under the hold action.
  void run_to_slide_start() {
    while (!done_ && time() < traj_.slide_start() - 0.5 * cfg_.rates.dt)
      step(hold_action_);
  }

  struct PolicyStepResult {
    double reward = 0.0;
    RewardTerms terms;
    bool done = false;
    bool fault = false;
  };

  // One policy interval under the given raw action (in (0,1)^action_dim).
  PolicyStepResult step(const VecX& action) {
    if (action.size() != cfg_.gains.action_dim())
      throw std::invalid_argument("SimInstance::step: action dimension mismatch");
    PolicyStepResult res;
    if (done_) {
      res.done = true;
      res.fault = fault_;
      return res;
    }
    prev_raw_action_ = raw_action_;
    raw_action_ = action;
    const VecX filtered = output_filter_.step(action);
    action6_ = cfg_.gains.base_action;
    for (int i = 0; i < cfg_.gains.action_dim(); ++i)
      action6_(cfg_.gains.adapted_axes[size_t(i)]) = filtered(i);

    RewardTerms acc;
    int n_ctrl = 0;
    for (int i = 0; i < cfg_.rates.policy_every && !done_; ++i) {
      if (step_index_ % cfg_.rates.control_every == 0) {
        control_update();
        acc += last_reward_terms_;
        ++n_ctrl;
      }
      physics_step();
    }
    if (n_ctrl > 0) acc *= 1.0 / double(n_ctrl);
    res.terms = acc;
    res.reward = acc.total();
    if (time() >= traj_.slide_end() - 0.5 * cfg_.rates.dt) done_ = true;
    if (fault_) {
      res.reward -= cfg_.reward.fault_penalty;
      done_ = true;
    }
    res.done = done_;
    res.fault = fault_;
    return res;
  }

  const FeatureVector& features() const { return features_; }

  // Ground-truth-only inputs for the teacher: features, mu at contact, and local
  // normals/heights sampled around the contact point.
  static constexpr int kLocalSamples = 5;
  static int privileged_dim() { return 6 + 1 + 3 * kLocalSamples + 2 * kLocalSamples; }

  VecX privileged_features() const {
    VecX z(privileged_dim());
    z.head<6>() = features_;
    z(6) = contact_.mu > 0.0 || contact_.in_contact ? contact_.mu : current_mu();
    double s_tip, depth;
    terrain_.to_plane(state_.tip_position(cfg_.body), s_tip, depth);
    const double offs[kLocalSamples] = {-0.2, -0.1, 0.0, 0.1, 0.2};
    for (int i = 0; i < kLocalSamples; ++i) {
      const double s = std::clamp(s_tip + offs[i], terrain_.span_begin(),
                                  terrain_.span_end() - 1e-9);
      const SurfaceSample surf = terrain_.query(s);
      z.segment<3>(7 + 3 * i) = surf.n_perp;
      z(7 + 3 * kLocalSamples + i) = surf.height;
      z(7 + 4 * kLocalSamples + i) = surf.mu;
    }
    return z;
  }

  const RobotState& state() const { return state_; }
  const ContactResult& contact() const { return contact_; }
  const InstanceConfig& config() const { return cfg_; }
  const Terrain& terrain() const { return terrain_; }
  const ReferenceTrajectory& trajectory() const { return traj_; }
  const GainSchedule& gain_schedule() const { return sched_; }
  const VecX& hold_action() const { return hold_action_; }
  std::uint64_t seed() const { return seed_; }

  void enable_logging(bool on) { logging_ = on; }
  const std::vector<LogRow>& log() const { return log_; }

  VecX project_action(const Vec6& full) const {
    VecX a(cfg_.gains.action_dim());
    for (int i = 0; i < a.size(); ++i) a(i) = full(cfg_.gains.adapted_axes[size_t(i)]);
    return a;
  }

 private:
  double current_mu() const {
    double s, depth;
    terrain_.to_plane(state_.tip_position(cfg_.body), s, depth);
    if (!terrain_.in_span(s)) return 0.0;
    return terrain_.query(s).mu;
  }

  void control_update() {
    const double t = time();
    const Reference ref = traj_.at(t);
    const RobotState meas = sensors_.measure_state(state_);
    meas_wrench_ = sensors_.measure_wrench(contact_, cfg_.rates.control_dt());

    // Feature assembly (measured-signal path).
    const Mat3 r_meas = meas.rotation();
    const Vec3 f_world_meas = r_meas * meas_wrench_.force;
    const Vec3 n_out = terrain_.plane_normal();
    const double f_n = f_world_meas.dot(n_out);
    const double f_t = (f_world_meas - f_n * n_out).norm();
    VecX ff(2);
    ff << f_t, f_n;
    const VecX& ff_filt = force_filter_.step(ff);
    const double pr_filt = pitch_rate_filter_.step1(meas.ang_vel.y());
    Vec6 e_s_meas, e_v_meas;
    tracking_errors(meas, ref, e_s_meas, e_v_meas);
    features_(0) = pr_filt;
    features_(1) = e_s_meas(4);
    features_(2) = e_s_meas.head<3>().dot(n_out);  // error along the interaction normal
    features_(3) = meas.lin_vel.dot(terrain_.slide_dir());
    features_(4) = ff_filt(0);
    features_(5) = ff_filt(1);

    // Gains and wrench command.
    const Vec6 k = adaptive_stiffness(action6_, sched_, cfg_.rates.control_dt());
    const Vec6 d = damping_from_stiffness(k, sched_.zeta);
    held_cmd_ = impedance_command(meas, ref, k, d, cfg_.body);

    // Reward from ground truth.
    Vec6 e_s, e_v;
    tracking_errors(state_, ref, e_s, e_v);
    compute_reward(e_s.tail<3>(), e_s.head<3>(), contact_.in_contact ? 0.0 : contact_.separation,
                   state_.ang_vel, raw_action_, prev_raw_action_, cfg_.reward,
                   &last_reward_terms_);

    if (logging_) {
      LogRow row;
      row.t = t;
      row.pos = state_.position;
      row.quat = state_.orientation;
      row.ref_pos = ref.pos_ref;
      row.e_p = e_s.head<3>();
      row.e_R = e_s.tail<3>();
      row.pitch = std::asin(std::clamp(-state_.rotation()(2, 0), -1.0, 1.0));
      row.pitch_rate = state_.ang_vel.y();
      row.tilt = tilt_angle(ref);
      row.gains = k;
      row.action = action6_;
      row.F_perp = contact_.F_perp;
      row.F_par = contact_.F_par;
      row.meas_F_perp = f_n;
      row.meas_F_par = f_t;
      row.in_contact = contact_.in_contact;
      row.separation = contact_.separation;
      row.reward = last_reward_terms_;
      row.fault = fault_;
      log_.push_back(row);
    }
  }

  double tilt_angle(const Reference& ref) const {
    const Vec3 bz = state_.rotation().col(2);
    const Vec3 rz = ref.att_ref.toRotationMatrix().col(2);
    return std::acos(std::clamp(bz.dot(rz), -1.0, 1.0));
  }

  void physics_step() {
    const Wrench w_act = actuator_.apply(held_cmd_);
    contact_ = compute_contact(state_, cfg_.body, terrain_, cfg_.contact);
    try {
      state_ = step_dynamics(state_, cfg_.body, w_act, contact_.wrench_body, cfg_.rates.dt);
    } catch (const DynamicsFault&) {
      fault_ = true;
      done_ = true;
      return;
    }
    ++step_index_;

    const Reference ref = traj_.at(time());
    if (tilt_angle(ref) > cfg_.fault_tilt_deg * M_PI / 180.0) fault_ = true;
    const Vec3 tip = state_.tip_position(cfg_.body);
    const double len = cfg_.scenario.trajectory.length();
    if (std::abs(tip.y()) > 1.0 || tip.x() < -1.2 || tip.x() > 0.5 || tip.z() > 0.5 ||
        tip.z() < -(len + 1.0))
      fault_ = true;
    if (fault_) done_ = true;
  }

  InstanceConfig cfg_;
  Terrain terrain_;
  ReferenceTrajectory traj_;
  std::uint64_t seed_;

  RobotState state_;
  ActuatorModel actuator_;
  SensorRig sensors_;
  GainSchedule sched_;
  LowPass pitch_rate_filter_{1, 1.0}, force_filter_{2, 1.0}, output_filter_{2, 1.0};
  Wrench held_cmd_ = Wrench::zero(Frame::Body);
  ContactResult contact_;
  Wrench meas_wrench_ = Wrench::zero(Frame::Body);
  FeatureVector features_ = FeatureVector::Zero();
  VecX hold_action_, raw_action_, prev_raw_action_;
  Vec6 action6_ = Vec6::Zero();
  RewardTerms last_reward_terms_;
  long step_index_ = 0;
  bool fault_ = false;
  bool done_ = false;
  bool logging_ = false;
  std::vector<LogRow> log_;
};

// A controller produces the raw policy-rate action from the instance.
using Controller = std::function<VecX(const SimInstance&)>;

inline Controller constant_controller(const VecX& action) {
  return [action](const SimInstance&) { return action; };
}

}  // namespace vicsim
