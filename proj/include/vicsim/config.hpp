#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "vicsim/env.hpp"
#include "vicsim/learning.hpp"

namespace vicsim {

struct RunConfig {
  std::string scenario_preset = "flat6";
  InstanceConfig instance;
  PpoConfig ppo;
  DistillConfig distill;
  PerturbRanges perturb;
  HandcraftedTeacherParams teacher;
  int n_instances = 8;
  int epochs = 500;
  int teacher_passes = 4;
  std::uint64_t seed = 1;
  int parallel = 1;
  std::string out_dir = "out";
  // Metrics window, seconds relative to the slide start; <0 means full slide.
  double metrics_window_begin = -1.0;
  double metrics_window_end = -1.0;
};

namespace detail {

inline void merge_json(nlohmann::json& base, const nlohmann::json& overlay) {
  if (!overlay.is_object() || !base.is_object()) {
    base = overlay;
    return;
  }
  for (auto it = overlay.begin(); it != overlay.end(); ++it) {
    if (base.contains(it.key()) && base[it.key()].is_object() && it.value().is_object())
      merge_json(base[it.key()], it.value());
    else
      base[it.key()] = it.value();
  }
}

inline nlohmann::json load_json_with_inherit(const std::string& path, int depth = 0) {
  if (depth > 8) throw std::runtime_error("config: inheritance chain too deep");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  nlohmann::json j;
  in >> j;
  if (j.contains("inherit")) {
    const std::string parent_rel = j.at("inherit").get<std::string>();
    const auto parent_path = std::filesystem::path(path).parent_path() / parent_rel;
    nlohmann::json base = load_json_with_inherit(parent_path.string(), depth + 1);
    j.erase("inherit");
    merge_json(base, j);
    return base;
  }
  return j;
}

inline Vec3 vec3_from(const nlohmann::json& j, const Vec3& def) {
  if (j.is_null()) return def;
  return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

inline Vec6 vec6_from(const nlohmann::json& j, const Vec6& def) {
  if (j.is_null()) return def;
  Vec6 v;
  for (int i = 0; i < 6; ++i) v(i) = j.at(size_t(i)).get<double>();
  return v;
}

}  // namespace detail

inline void apply_json(RunConfig& cfg, const nlohmann::json& j) {
  using detail::vec3_from;
  using detail::vec6_from;

  if (j.contains("scenario")) {
    const auto& s = j.at("scenario");
    if (s.is_string()) {
      cfg.scenario_preset = s.get<std::string>();
      cfg.instance.scenario = scenario_preset(cfg.scenario_preset);
    } else {
      if (s.contains("preset")) {
        cfg.scenario_preset = s.at("preset").get<std::string>();
        cfg.instance.scenario = scenario_preset(cfg.scenario_preset);
      }
      auto& sc = cfg.instance.scenario;
      sc.friction_set = s.value("friction_set", sc.friction_set);
      sc.patch_length = s.value("patch_length", sc.patch_length);
      sc.step_height = s.value("step_height", sc.step_height);
      sc.step_alternating = s.value("step_alternating", sc.step_alternating);
      sc.step_position = s.value("step_position", sc.step_position);
      sc.step_mu = s.value("step_mu", sc.step_mu);
      sc.rock_amplitude = s.value("rock_amplitude", sc.rock_amplitude);
      sc.rock_cell_size = s.value("rock_cell_size", sc.rock_cell_size);
      sc.mu_resample_period = s.value("mu_resample_period", sc.mu_resample_period);
      sc.plane_offset = s.value("plane_offset", sc.plane_offset);
      if (s.contains("trajectory")) {
        const auto& tj = s.at("trajectory");
        auto& t = sc.trajectory;
        t.delta = tj.value("delta", t.delta);
        t.speed = tj.value("speed", t.speed);
        t.slide_duration = tj.value("slide_duration", t.slide_duration);
        t.approach_duration = tj.value("approach_duration", t.approach_duration);
        t.standoff = tj.value("standoff", t.standoff);
        t.blend_time = tj.value("blend_time", t.blend_time);
      }
    }
  }
  if (j.contains("body")) {
    const auto& b = j.at("body");
    auto& body = cfg.instance.body;
    body.mass = b.value("mass", body.mass);
    if (b.contains("inertia_diag")) {
      const Vec3 d = vec3_from(b.at("inertia_diag"), body.inertia.diagonal());
      body.inertia = d.asDiagonal();
    }
    if (b.contains("r_com")) body.r_com = vec3_from(b.at("r_com"), body.r_com);
    if (b.contains("r_end")) body.r_end = vec3_from(b.at("r_end"), body.r_end);
    body.gravity = b.value("gravity", body.gravity);
  }
  if (j.contains("actuator")) {
    const auto& a = j.at("actuator");
    auto& act = cfg.instance.actuator;
    if (a.contains("force_limit")) act.force_limit = vec3_from(a.at("force_limit"), act.force_limit);
    if (a.contains("torque_limit"))
      act.torque_limit = vec3_from(a.at("torque_limit"), act.torque_limit);
    act.delay_steps = a.value("delay_steps", act.delay_steps);
  }
  if (j.contains("contact")) {
    const auto& c = j.at("contact");
    auto& cp = cfg.instance.contact;
    cp.k_n = c.value("k_n", cp.k_n);
    cp.c_n = c.value("c_n", cp.c_n);
    cp.v_reg = c.value("v_reg", cp.v_reg);
  }
  if (j.contains("gains")) {
    const auto& g = j.at("gains");
    auto& gc = cfg.instance.gains;
    if (g.contains("k_min")) gc.schedule.k_min = vec6_from(g.at("k_min"), gc.schedule.k_min);
    if (g.contains("k_max")) gc.schedule.k_max = vec6_from(g.at("k_max"), gc.schedule.k_max);
    gc.schedule.zeta = g.value("zeta", gc.schedule.zeta);
    if (g.contains("slew_rate"))
      gc.schedule.slew_rate = vec6_from(g.at("slew_rate"), gc.schedule.slew_rate);
    if (g.contains("adapted_axes")) gc.adapted_axes = g.at("adapted_axes").get<std::vector<int>>();
    if (g.contains("base_action")) gc.base_action = vec6_from(g.at("base_action"), gc.base_action);
    if (g.contains("baseline_action"))
      gc.baseline_action = vec6_from(g.at("baseline_action"), gc.baseline_action);
    gc.output_cutoff_hz = g.value("output_cutoff_hz", gc.output_cutoff_hz);
  }
  if (j.contains("rates")) {
    const auto& r = j.at("rates");
    auto& rt = cfg.instance.rates;
    rt.dt = r.value("dt", rt.dt);
    rt.control_every = r.value("control_every", rt.control_every);
    rt.policy_every = r.value("policy_every", rt.policy_every);
  }
  if (j.contains("filters")) {
    const auto& f = j.at("filters");
    cfg.instance.filters.pitch_rate_cutoff_hz =
        f.value("pitch_rate_cutoff_hz", cfg.instance.filters.pitch_rate_cutoff_hz);
    cfg.instance.filters.force_cutoff_hz =
        f.value("force_cutoff_hz", cfg.instance.filters.force_cutoff_hz);
  }
  if (j.contains("sensors")) {
    const auto& s = j.at("sensors");
    auto& sm = cfg.instance.sensors;
    sm.wrench_enabled = s.value("wrench_enabled", sm.wrench_enabled);
    sm.state_enabled = s.value("state_enabled", sm.state_enabled);
    if (s.contains("wrench_noise_std"))
      sm.wrench_noise_std = vec6_from(s.at("wrench_noise_std"), sm.wrench_noise_std);
    if (s.contains("wrench_bias_walk_std"))
      sm.wrench_bias_walk_std = vec6_from(s.at("wrench_bias_walk_std"), sm.wrench_bias_walk_std);
    sm.pos_noise_std = s.value("pos_noise_std", sm.pos_noise_std);
    sm.vel_noise_std = s.value("vel_noise_std", sm.vel_noise_std);
    sm.att_noise_std = s.value("att_noise_std", sm.att_noise_std);
    sm.ang_vel_noise_std = s.value("ang_vel_noise_std", sm.ang_vel_noise_std);
  }
  if (j.contains("reward")) {
    const auto& r = j.at("reward");
    auto& w = cfg.instance.reward;
    w.l_eR = r.value("l_eR", w.l_eR);
    w.l_p = r.value("l_p", w.l_p);
    w.l_d = r.value("l_d", w.l_d);
    w.l_omega = r.value("l_omega", w.l_omega);
    w.l_a = r.value("l_a", w.l_a);
    w.fault_penalty = r.value("fault_penalty", w.fault_penalty);
  }
  if (j.contains("ppo")) {
    const auto& p = j.at("ppo");
    cfg.ppo.gamma = p.value("gamma", cfg.ppo.gamma);
    cfg.ppo.lambda = p.value("lambda", cfg.ppo.lambda);
    cfg.ppo.clip_eps = p.value("clip_eps", cfg.ppo.clip_eps);
    cfg.ppo.epochs = p.value("epochs", cfg.ppo.epochs);
    cfg.ppo.minibatch = p.value("minibatch", cfg.ppo.minibatch);
    cfg.ppo.lr = p.value("lr", cfg.ppo.lr);
    cfg.ppo.entropy_coef = p.value("entropy_coef", cfg.ppo.entropy_coef);
    cfg.ppo.value_coef = p.value("value_coef", cfg.ppo.value_coef);
  }
  if (j.contains("distill")) {
    const auto& d = j.at("distill");
    cfg.distill.epochs = d.value("epochs", cfg.distill.epochs);
    cfg.distill.minibatch = d.value("minibatch", cfg.distill.minibatch);
    cfg.distill.lr = d.value("lr", cfg.distill.lr);
    cfg.distill.holdout_fraction = d.value("holdout_fraction", cfg.distill.holdout_fraction);
  }
  if (j.contains("perturb")) {
    const auto& p = j.at("perturb");
    cfg.perturb.mass = p.value("mass", cfg.perturb.mass);
    cfg.perturb.inertia = p.value("inertia", cfg.perturb.inertia);
    cfg.perturb.r_end = p.value("r_end", cfg.perturb.r_end);
    cfg.perturb.k_n = p.value("k_n", cfg.perturb.k_n);
    cfg.perturb.delay = p.value("delay", cfg.perturb.delay);
  }
  if (j.contains("teacher")) {
    const auto& t = j.at("teacher");
    auto& h = cfg.teacher;
    h.mu_lo = t.value("mu_lo", h.mu_lo);
    h.mu_hi = t.value("mu_hi", h.mu_hi);
    h.ang_min = t.value("ang_min", h.ang_min);
    h.ang_max = t.value("ang_max", h.ang_max);
    h.trans_min = t.value("trans_min", h.trans_min);
    h.trans_max = t.value("trans_max", h.trans_max);
    h.height_spread_threshold = t.value("height_spread_threshold", h.height_spread_threshold);
  }
  cfg.n_instances = j.value("n_instances", cfg.n_instances);
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.teacher_passes = j.value("teacher_passes", cfg.teacher_passes);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.parallel = j.value("parallel", cfg.parallel);
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  cfg.metrics_window_begin = j.value("metrics_window_begin", cfg.metrics_window_begin);
  cfg.metrics_window_end = j.value("metrics_window_end", cfg.metrics_window_end);
}

inline RunConfig load_run_config(const std::string& path) {
  RunConfig cfg;
  cfg.instance.scenario = scenario_preset(cfg.scenario_preset);
  if (!path.empty()) apply_json(cfg, detail::load_json_with_inherit(path));
  cfg.instance.validate();
  return cfg;
}

}  // namespace vicsim
