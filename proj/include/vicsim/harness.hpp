#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vicsim/checkpoint.hpp"
#include "vicsim/config.hpp"
#include "vicsim/learning.hpp"
#include "vicsim/logging.hpp"

namespace vicsim {

// Terrain for an evaluation run of the given config. The flat3wsw preset is the
// low | high | low friction surface; everything else goes through make_terrain.
inline Terrain build_terrain(const RunConfig& cfg, Rng& rng) {
  if (cfg.scenario_preset == "flat3wsw") {
    const auto& fs = cfg.instance.scenario.friction_set;
    const double lo = *std::min_element(fs.begin(), fs.end());
    const double hi = *std::max_element(fs.begin(), fs.end());
    return make_flat_triple(lo, hi, cfg.instance.scenario.trajectory,
                            cfg.instance.scenario.plane_offset);
  }
  return make_terrain(cfg.instance.scenario, rng);
}

inline Controller baseline_controller(const RunConfig& cfg) {
  VecX a(int(cfg.instance.gains.adapted_axes.size()));
  for (int i = 0; i < a.size(); ++i)
    a(i) = cfg.instance.gains.baseline_action(cfg.instance.gains.adapted_axes[size_t(i)]);
  return constant_controller(a);
}

// Deterministic (mean-path) student policy from a checkpoint.
inline Controller policy_controller(const ActorCritic& ac) {
  return [&ac](const SimInstance& env) {
    return ac.actor.forward1(ac.norm.apply(env.features()));
  };
}

inline Controller teacher_controller(const TeacherSpec& teacher) {
  return [&teacher](const SimInstance& env) {
    return teacher_action(teacher, env.privileged_features());
  };
}

struct EpisodeResult {
  std::vector<LogRow> log;
  Metrics metrics;
  bool fault = false;
};

inline EpisodeResult run_episode(const RunConfig& cfg, const Terrain& terrain,
                                 const Controller& controller, std::uint64_t seed) {
  SimInstance env(cfg.instance, terrain, seed);
  env.enable_logging(true);
  env.run_to_slide_start();
  const int horizon = env.policy_steps_per_slide();
  int steps = 0;
  while (!env.done() && steps < horizon) {
    env.step(controller(env));
    ++steps;
  }
  EpisodeResult res;
  res.log = env.log();
  res.fault = env.fault();
  const double t_slide = env.trajectory().slide_start();
  double t0 = t_slide, t1 = env.trajectory().slide_end();
  if (cfg.metrics_window_begin >= 0.0) t0 = t_slide + cfg.metrics_window_begin;
  if (cfg.metrics_window_end >= 0.0) t1 = t_slide + cfg.metrics_window_end;
  res.metrics = compute_metrics(res.log, t_slide, t0, t1);
  return res;
}

// ---------------------------------------------------------------------------
// Gain sweep (lo/mid/hi grid on the adapted axes vs the learned policy)

struct SweepRow {
  std::string label;
  double k_trans = 0.0;  // realized stiffness, adapted translational axis
  double k_rot = 0.0;
  Metrics mean;
  bool any_fault = false;
};

inline Metrics average_metrics(const std::vector<Metrics>& ms) {
  Metrics m;
  for (const auto& x : ms) {
    m.mean_tilt_deg += x.mean_tilt_deg;
    m.rms_pitch_rate += x.rms_pitch_rate;
    m.rms_position_error += x.rms_position_error;
    m.rms_attitude_error += x.rms_attitude_error;
    m.contact_loss_fraction += x.contact_loss_fraction;
    m.fault = m.fault || x.fault;
  }
  const double n = double(ms.size());
  m.mean_tilt_deg /= n;
  m.rms_pitch_rate /= n;
  m.rms_position_error /= n;
  m.rms_attitude_error /= n;
  m.contact_loss_fraction /= n;
  return m;
}

// Runs every (k_rot, k_trans) in {lo,mid,hi}^2 over the given terrains with
// `repeats` seeds each, plus an optional learned-policy row.
inline std::vector<SweepRow> gain_sweep(const RunConfig& cfg, const std::vector<Terrain>& terrains,
                                        const ActorCritic* policy, int repeats, int n_threads) {
  const std::vector<std::pair<std::string, double>> levels = {
      {"lo", 0.12}, {"mid", 0.5}, {"hi", 0.88}};
  const auto& axes = cfg.instance.gains.adapted_axes;
  if (axes.size() != 2)
    throw std::invalid_argument("gain_sweep: expects 2 adapted axes (translational, angular)");

  struct Job {
    std::string label;
    std::optional<VecX> const_action;  // empty -> policy row
    double k_trans = 0.0, k_rot = 0.0;
  };
  std::vector<Job> jobs;
  const auto& sched = cfg.instance.gains.schedule;
  for (const auto& [ln_a, av_a] : levels) {      // angular level
    for (const auto& [ln_t, av_t] : levels) {    // translational level
      Job job;
      job.label = "ka_" + ln_a + "_kl_" + ln_t;
      VecX a(2);
      a << av_t, av_a;
      job.const_action = a;
      job.k_trans = sched.k_min(axes[0]) + (sched.k_max(axes[0]) - sched.k_min(axes[0])) * av_t;
      job.k_rot = sched.k_min(axes[1]) + (sched.k_max(axes[1]) - sched.k_min(axes[1])) * av_a;
      jobs.push_back(job);
    }
  }
  if (policy) jobs.push_back(Job{"policy", std::nullopt, 0.0, 0.0});

  std::vector<SweepRow> rows(jobs.size());
  parallel_for(int(jobs.size()), n_threads, [&](int ji) {
    const Job& job = jobs[size_t(ji)];
    std::vector<Metrics> ms;
    bool any_fault = false;
    for (std::size_t ti = 0; ti < terrains.size(); ++ti) {
      for (int rep = 0; rep < repeats; ++rep) {
        const std::uint64_t seed = mix_seed(cfg.seed, 1000 * ti + size_t(rep));
        const Controller ctrl = job.const_action ? constant_controller(*job.const_action)
                                                 : policy_controller(*policy);
        const EpisodeResult res = run_episode(cfg, terrains[ti], ctrl, seed);
        ms.push_back(res.metrics);
        any_fault = any_fault || res.fault;
      }
    }
    SweepRow row;
    row.label = job.label;
    row.k_trans = job.k_trans;
    row.k_rot = job.k_rot;
    row.mean = average_metrics(ms);
    row.any_fault = any_fault;
    rows[size_t(ji)] = row;
  });
  return rows;
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_sweep_csv: cannot open " + path);
  out << "label[v1],k_trans_N_m,k_rot_Nm_rad,mean_tilt_deg,rms_pitch_rate_rad_s,"
         "rms_position_error_m,rms_attitude_error,contact_loss_fraction,any_fault\n";
  for (const auto& r : rows) {
    out << r.label << ',' << format_number(r.k_trans) << ',' << format_number(r.k_rot) << ','
        << format_number(r.mean.mean_tilt_deg) << ',' << format_number(r.mean.rms_pitch_rate)
        << ',' << format_number(r.mean.rms_position_error) << ','
        << format_number(r.mean.rms_attitude_error) << ','
        << format_number(r.mean.contact_loss_fraction) << ',' << (r.any_fault ? 1 : 0) << "\n";
  }
}

// ---------------------------------------------------------------------------
// PPO training driver

struct TrainProgress {
  int epoch = 0;
  double mean_return = 0.0;
  RewardTerms terms;
  PpoStats stats;
  double fault_rate = 0.0;
};
using ProgressFn = std::function<void(const TrainProgress&)>;

inline std::vector<SimInstance> make_instances(const RunConfig& cfg, int n, std::uint64_t seed) {
  std::vector<SimInstance> envs;
  envs.reserve(size_t(n));
  for (int i = 0; i < n; ++i) {
    Rng rng(mix_seed(seed, std::uint64_t(i)));
    InstanceConfig icfg = perturb_instance(cfg.instance, rng, cfg.perturb);
    Terrain terrain = make_terrain(icfg.scenario, rng);
    envs.emplace_back(std::move(icfg), std::move(terrain), mix_seed(seed, 7000 + i));
  }
  return envs;
}

// Bootstrap observation-normalization statistics from one hold-action pass.
inline void bootstrap_normalizer(std::vector<SimInstance>& envs, ActorCritic& ac, ObsMode mode) {
  if (ac.norm.frozen()) return;
  for (auto& env : envs) {
    env.reset();
    env.run_to_slide_start();
    const int horizon = env.policy_steps_per_slide();
    int steps = 0;
    while (!env.done() && steps < horizon) {
      ac.norm.observe(observe(env, mode));
      env.step(env.hold_action());
      ++steps;
    }
  }
  ac.norm.freeze();
}

inline std::vector<double> train_ppo(std::vector<SimInstance>& envs, ActorCritic& ac,
                                     ObsMode mode, const PpoConfig& ppo, int epochs,
                                     std::uint64_t seed, int n_threads,
                                     const ProgressFn& progress = nullptr) {
  bootstrap_normalizer(envs, ac, mode);
  Adam actor_opt(ppo.lr), critic_opt(ppo.lr);
  Rng shuffle_rng(mix_seed(seed, 0x5aff1e));
  std::vector<double> epoch_returns;
  epoch_returns.reserve(size_t(epochs));
  for (int epoch = 0; epoch < epochs; ++epoch) {
    RolloutBatch batch =
        collect_rollouts(envs, ac, mode, mix_seed(seed, 0xe90c + std::uint64_t(epoch)), n_threads);
    double mean_ret = 0.0;
    for (double r : batch.episode_returns) mean_ret += r;
    mean_ret /= double(batch.episode_returns.size());
    const PpoStats stats = ppo_update(ac, batch, ppo, actor_opt, critic_opt, shuffle_rng);
    epoch_returns.push_back(mean_ret);
    if (progress) {
      TrainProgress p;
      p.epoch = epoch;
      p.mean_return = mean_ret;
      p.terms = batch.mean_terms;
      p.stats = stats;
      p.fault_rate = batch.fault_rate;
      progress(p);
    }
  }
  return epoch_returns;
}

inline std::string training_csv_header() {
  return "epoch[v1],mean_return,r_att,r_pos,r_dist,r_omega,r_smooth,kl,clip_fraction,fault_rate";
}

inline std::string training_csv_row(const TrainProgress& p) {
  std::ostringstream os;
  os << p.epoch << ',' << format_number(p.mean_return) << ',' << format_number(p.terms.att)
     << ',' << format_number(p.terms.pos) << ',' << format_number(p.terms.dist) << ','
     << format_number(p.terms.omega) << ',' << format_number(p.terms.smooth) << ','
     << format_number(p.stats.mean_kl) << ',' << format_number(p.stats.clip_fraction) << ','
     << format_number(p.fault_rate);
  return os.str();
}

}  // namespace vicsim
