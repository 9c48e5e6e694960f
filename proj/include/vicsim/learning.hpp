#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <numeric>
#include <thread>
#include <vector>

#include "vicsim/env.hpp"
#include "vicsim/policy.hpp"
#include "vicsim/reward.hpp"

namespace vicsim {

inline void parallel_for(int n, int n_threads, const std::function<void(int)>& fn) {
  if (n_threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> threads;
  std::atomic<int> next{0};
  const int workers = std::min(n_threads, n);
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : threads) t.join();
}

// ---------------------------------------------------------------------------
// Teacher

enum class TeacherKind { Handcrafted, LearnedPrivileged };

struct HandcraftedTeacherParams {
  double mu_lo = 0.05, mu_hi = 0.5;
  // The contact normal force at the tool tip reduces the effective angular
  // stiffness by ~|r_end|*F_perp, so the angular action never drops far below
  // the hold level; friction mainly unloads the translational axis.
  double ang_min = 0.72, ang_max = 0.95;   // angular (pitch) action range
  double trans_min = 0.1, trans_max = 0.9; // translational (normal) action range
  double height_spread_threshold = 0.005;  // m
};

struct TeacherSpec {
  TeacherKind kind = TeacherKind::Handcrafted;
  HandcraftedTeacherParams handcrafted;
  Mlp net;             // LearnedPrivileged
  Normalizer norm;     // LearnedPrivileged input normalization
};

// Privileged vector layout (see SimInstance::privileged_features):
// [0..5] student features, [6] mu at contact, [7..7+3k) local normals,
// [7+3k..7+4k) local heights, [7+4k..7+5k) local friction samples.
// Action order follows the adapted axes: [translational, angular].
inline VecX handcrafted_teacher(const VecX& priv, const HandcraftedTeacherParams& p) {
  const double mu = priv(6);
  const double u = std::clamp((mu - p.mu_lo) / (p.mu_hi - p.mu_lo), 0.0, 1.0);
  double a_trans = p.trans_max - (p.trans_max - p.trans_min) * u;
  double a_ang = p.ang_min + (p.ang_max - p.ang_min) * u;

  const int k = SimInstance::kLocalSamples;
  const auto heights = priv.segment(7 + 3 * k, k);
  const double spread = heights.maxCoeff() - heights.minCoeff();
  if (spread > p.height_spread_threshold) {
    // Near height discontinuities, pull both axes toward the compliant end.
    const double w = std::min(1.0, (spread - p.height_spread_threshold) /
                                       p.height_spread_threshold);
    a_trans += w * (p.trans_min - a_trans);
    a_ang += w * (p.ang_min - a_ang);
  }
  VecX a(2);
  a << a_trans, a_ang;
  return a;
}

inline VecX teacher_action(const TeacherSpec& spec, const VecX& priv) {
  if (spec.kind == TeacherKind::Handcrafted) return handcrafted_teacher(priv, spec.handcrafted);
  return spec.net.forward1(spec.norm.apply(priv));
}

// ---------------------------------------------------------------------------
// Instance perturbation

struct PerturbRanges {
  double mass = 0.1;
  double inertia = 0.1;
  double r_end = 0.1;
  double k_n = 0.1;
  double delay = 0.25;
};

inline InstanceConfig perturb_instance(const InstanceConfig& nominal, Rng& rng,
                                       const PerturbRanges& ranges = {}) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  InstanceConfig cfg = nominal;
  cfg.body.mass *= 1.0 + ranges.mass * u(rng);
  Mat3 inertia = nominal.body.inertia;
  for (int i = 0; i < 3; ++i) inertia(i, i) *= 1.0 + ranges.inertia * u(rng);
  cfg.body.inertia = inertia;
  cfg.body.r_end *= 1.0 + ranges.r_end * u(rng);
  cfg.contact.k_n *= 1.0 + ranges.k_n * u(rng);
  cfg.actuator.delay_steps = std::max(
      0, int(std::lround(nominal.actuator.delay_steps * (1.0 + ranges.delay * u(rng)))));
  return cfg;
}

// ---------------------------------------------------------------------------
// Rollout collection / GAE / PPO

enum class ObsMode { Student, Privileged };

inline VecX observe(const SimInstance& env, ObsMode mode) {
  if (mode == ObsMode::Student) return env.features();
  return env.privileged_features();
}

struct Transition {
  VecX observation;  // normalized
  VecX action_u;     // pre-sigmoid sample
  double reward = 0.0;
  double value = 0.0;
  double log_prob = 0.0;
  bool done = false;
  bool fault = false;
};

struct RolloutBatch {
  std::vector<std::vector<Transition>> per_env;
  std::vector<double> bootstrap_value;  // per env, 0 when faulted
  std::vector<double> episode_returns;
  RewardTerms mean_terms;
  double fault_rate = 0.0;

  int size() const {
    int n = 0;
    for (const auto& e : per_env) n += int(e.size());
    return n;
  }
};

struct ActorCritic {
  Mlp actor;   // sigmoid head + log_std
  Mlp critic;  // linear scalar head
  Normalizer norm;
};

inline double gaussian_log_prob(const VecX& u, const VecX& mean, const VecX& log_std) {
  double lp = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    const double s = std::exp(log_std(i));
    const double d = (u(i) - mean(i)) / s;
    lp += -0.5 * d * d - log_std(i) - 0.5 * std::log(2.0 * M_PI);
  }
  return lp;
}

// One full episode per environment instance: approach under the hold action,
// then the slide phase with stochastic actions at the policy rate. Per-env
// results are stored by instance index, so sequential and parallel collection
// produce identical batches.
inline RolloutBatch collect_rollouts(std::vector<SimInstance>& envs, ActorCritic& ac,
                                     ObsMode mode, std::uint64_t epoch_seed, int n_threads) {
  const int n = int(envs.size());
  RolloutBatch batch;
  batch.per_env.resize(size_t(n));
  batch.bootstrap_value.assign(size_t(n), 0.0);
  batch.episode_returns.assign(size_t(n), 0.0);
  std::vector<RewardTerms> terms(static_cast<std::size_t>(n));
  std::vector<uint8_t> faulted(size_t(n), 0);

  parallel_for(n, n_threads, [&](int e) {
    SimInstance& env = envs[size_t(e)];
    Rng rng(mix_seed(epoch_seed, std::uint64_t(e)));
    std::normal_distribution<double> n01(0.0, 1.0);
    env.reset();
    env.run_to_slide_start();
    auto& trans = batch.per_env[size_t(e)];
    const int horizon = env.policy_steps_per_slide();
    trans.reserve(size_t(horizon));
    RewardTerms acc;
    int steps = 0;
    while (!env.done() && steps < horizon) {
      const VecX obs = ac.norm.apply(observe(env, mode));
      const VecX mean_u = ac.actor.forward(obs.transpose(), nullptr, false).transpose().col(0);
      VecX u(mean_u.size());
      for (int i = 0; i < u.size(); ++i)
        u(i) = mean_u(i) + std::exp(ac.actor.log_std(i)) * n01(rng);
      VecX action(u.size());
      for (int i = 0; i < u.size(); ++i) action(i) = sigmoid(u(i));
      const auto res = env.step(action);
      Transition tr;
      tr.observation = obs;
      tr.action_u = u;
      tr.reward = res.reward;
      tr.value = ac.critic.forward1(obs)(0);
      tr.log_prob = gaussian_log_prob(u, mean_u, ac.actor.log_std);
      tr.done = res.done;
      tr.fault = res.fault;
      trans.push_back(std::move(tr));
      acc += res.terms;
      batch.episode_returns[size_t(e)] += res.reward;
      ++steps;
    }
    if (!trans.empty()) {
      acc *= 1.0 / double(trans.size());
      terms[size_t(e)] = acc;
    }
    faulted[size_t(e)] = env.fault() ? 1 : 0;
    if (!env.fault()) {
      const VecX obs = ac.norm.apply(observe(env, mode));
      batch.bootstrap_value[size_t(e)] = ac.critic.forward1(obs)(0);
    }
  });

  int n_fault = 0;
  for (int e = 0; e < n; ++e) {
    batch.mean_terms += terms[size_t(e)];
    n_fault += faulted[size_t(e)];
  }
  batch.mean_terms *= 1.0 / double(n);
  batch.fault_rate = double(n_fault) / double(n);
  if (batch.size() == 0)
    throw std::runtime_error("collect_rollouts: all instances faulted before the slide phase");
  return batch;
}

// Standard generalized advantage estimation over per-env segments; advantages
// normalized over the whole batch.
inline void gae_advantages(const RolloutBatch& batch, double gamma, double lambda,
                           VecX& advantages, VecX& returns) {
  const int n = batch.size();
  advantages.resize(n);
  returns.resize(n);
  int offset = 0;
  for (std::size_t e = 0; e < batch.per_env.size(); ++e) {
    const auto& seg = batch.per_env[e];
    const int T = int(seg.size());
    if (T == 0) continue;
    double next_adv = 0.0;
    double next_value = batch.bootstrap_value[e];
    for (int t = T - 1; t >= 0; --t) {
      const double delta = seg[size_t(t)].reward + gamma * next_value - seg[size_t(t)].value;
      next_adv = delta + gamma * lambda * next_adv;
      advantages(offset + t) = next_adv;
      returns(offset + t) = next_adv + seg[size_t(t)].value;
      next_value = seg[size_t(t)].value;
    }
    offset += T;
  }
  const double mean = advantages.mean();
  const double std = std::sqrt((advantages.array() - mean).square().mean() + 1e-8);
  advantages = (advantages.array() - mean) / std;
}

struct PpoConfig {
  double gamma = 0.99;
  double lambda = 0.95;
  double clip_eps = 0.2;
  int epochs = 4;
  int minibatch = 1024;
  double lr = 3e-4;
  double entropy_coef = 1e-3;
  double value_coef = 0.5;
};

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double mean_kl = 0.0;
  double clip_fraction = 0.0;
};

inline PpoStats ppo_update(ActorCritic& ac, const RolloutBatch& batch, const PpoConfig& cfg,
                           Adam& actor_opt, Adam& critic_opt, Rng& rng) {
  const int n = batch.size();
  const int obs_dim = ac.actor.in_dim();
  const int act_dim = ac.actor.out_dim();
  MatX obs(n, obs_dim), actions(n, act_dim);
  VecX old_log_prob(n);
  {
    int i = 0;
    for (const auto& seg : batch.per_env)
      for (const auto& tr : seg) {
        obs.row(i) = tr.observation.transpose();
        actions.row(i) = tr.action_u.transpose();
        old_log_prob(i) = tr.log_prob;
        ++i;
      }
  }
  VecX advantages, returns;
  gae_advantages(batch, cfg.gamma, cfg.lambda, advantages, returns);

  PpoStats stats;
  int stat_count = 0;
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(idx.begin(), idx.end(), rng);
    for (int start = 0; start < n; start += cfg.minibatch) {
      const int m = std::min(cfg.minibatch, n - start);
      MatX mb_obs(m, obs_dim), mb_u(m, act_dim);
      VecX mb_adv(m), mb_ret(m), mb_old_lp(m);
      for (int j = 0; j < m; ++j) {
        const int k = idx[size_t(start + j)];
        mb_obs.row(j) = obs.row(k);
        mb_u.row(j) = actions.row(k);
        mb_adv(j) = advantages(k);
        mb_ret(j) = returns(k);
        mb_old_lp(j) = old_log_prob(k);
      }

      // Actor: clipped surrogate + entropy bonus.
      Mlp::Cache cache;
      const MatX mean_u = ac.actor.forward(mb_obs, &cache, false);
      const VecX sigma = ac.actor.log_std.array().exp();
      VecX new_lp = VecX::Zero(m);
      for (int j = 0; j < m; ++j) {
        for (int a = 0; a < act_dim; ++a) {
          const double d = (mb_u(j, a) - mean_u(j, a)) / sigma(a);
          new_lp(j) += -0.5 * d * d - ac.actor.log_std(a) - 0.5 * std::log(2.0 * M_PI);
        }
      }
      MatX d_mean = MatX::Zero(m, act_dim);
      Mlp::Grads actor_grads = Mlp::Grads::zeros_like(ac.actor);
      double policy_loss = 0.0, kl = 0.0;
      int clipped = 0;
      for (int j = 0; j < m; ++j) {
        const double ratio = std::exp(new_lp(j) - mb_old_lp(j));
        const double a_j = mb_adv(j);
        const double unclipped = ratio * a_j;
        const double clip_r = std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
        const double clipped_obj = clip_r * a_j;
        policy_loss += -std::min(unclipped, clipped_obj);
        kl += mb_old_lp(j) - new_lp(j);
        if (std::abs(ratio - 1.0) > cfg.clip_eps) ++clipped;
        const bool active = unclipped <= clipped_obj;  // gradient flows when unclipped is min
        if (active) {
          for (int a = 0; a < act_dim; ++a) {
            const double dlp_dmean = (mb_u(j, a) - mean_u(j, a)) / (sigma(a) * sigma(a));
            d_mean(j, a) = -a_j * ratio * dlp_dmean / double(m);
            const double d2 = (mb_u(j, a) - mean_u(j, a)) / sigma(a);
            actor_grads.d_log_std(a) += -a_j * ratio * (d2 * d2 - 1.0) / double(m);
          }
        }
      }
      // Entropy of the diagonal Gaussian: sum(log sigma) + const.
      for (int a = 0; a < act_dim; ++a) actor_grads.d_log_std(a) -= cfg.entropy_coef;
      ac.actor.backward(cache, d_mean, false, actor_grads);
      actor_opt.step(ac.actor, actor_grads);

      // Critic: value regression.
      Mlp::Cache vcache;
      const MatX v = ac.critic.forward(mb_obs, &vcache, true);
      MatX dv(m, 1);
      double value_loss = 0.0;
      for (int j = 0; j < m; ++j) {
        const double err = v(j, 0) - mb_ret(j);
        value_loss += 0.5 * err * err;
        dv(j, 0) = cfg.value_coef * err / double(m);
      }
      Mlp::Grads critic_grads = Mlp::Grads::zeros_like(ac.critic);
      ac.critic.backward(vcache, dv, true, critic_grads);
      critic_opt.step(ac.critic, critic_grads);

      stats.policy_loss += policy_loss / double(m);
      stats.value_loss += value_loss / double(m);
      stats.mean_kl += kl / double(m);
      stats.clip_fraction += double(clipped) / double(m);
      ++stat_count;
    }
  }
  if (stat_count > 0) {
    stats.policy_loss /= stat_count;
    stats.value_loss /= stat_count;
    stats.mean_kl /= stat_count;
    stats.clip_fraction /= stat_count;
  }
  if (!std::isfinite(stats.policy_loss) || !std::isfinite(stats.value_loss))
    throw std::runtime_error("ppo_update: divergent (non-finite) loss");
  return stats;
}

// ---------------------------------------------------------------------------
// Teacher data collection and student distillation

struct DistillDataset {
  MatX features;  // raw (unnormalized) student features
  MatX labels;    // teacher actions
};

// Roll out the teacher over the instances; record (student features, teacher
// action) pairs during the slide phase. Small action dither widens coverage
// without touching the labels.
inline DistillDataset collect_teacher_dataset(std::vector<SimInstance>& envs,
                                              const TeacherSpec& teacher, int passes,
                                              std::uint64_t seed, int n_threads,
                                              double dither_std = 0.03) {
  const int n = int(envs.size());
  std::vector<std::vector<std::pair<VecX, VecX>>> rows(static_cast<std::size_t>(n));
  for (int pass = 0; pass < passes; ++pass) {
    parallel_for(n, n_threads, [&](int e) {
      SimInstance& env = envs[size_t(e)];
      Rng rng(mix_seed(mix_seed(seed, std::uint64_t(pass)), std::uint64_t(e)));
      std::normal_distribution<double> n01(0.0, 1.0);
      env.reset();
      env.run_to_slide_start();
      const int horizon = env.policy_steps_per_slide();
      int steps = 0;
      while (!env.done() && steps < horizon) {
        const VecX z = env.features();
        const VecX label = teacher_action(teacher, env.privileged_features());
        VecX applied = label;
        if (dither_std > 0.0)
          for (int i = 0; i < applied.size(); ++i)
            applied(i) = std::clamp(applied(i) + dither_std * n01(rng), 0.01, 0.99);
        env.step(applied);
        rows[size_t(e)].emplace_back(z, label);
        ++steps;
      }
    });
  }
  int total = 0;
  for (const auto& r : rows) total += int(r.size());
  DistillDataset ds;
  ds.features.resize(total, 6);
  ds.labels.resize(total, rows.empty() || rows[0].empty() ? 2 : rows[0][0].second.size());
  int i = 0;
  for (const auto& r : rows)
    for (const auto& [z, a] : r) {
      ds.features.row(i) = z.transpose();
      ds.labels.row(i) = a.transpose();
      ++i;
    }
  return ds;
}

struct DistillConfig {
  int epochs = 200;
  int minibatch = 256;
  double lr = 1e-3;
  double holdout_fraction = 0.1;
};

struct DistillResult {
  Mlp student;
  Normalizer norm;
  double train_mse = 0.0;
  double holdout_mse = 0.0;
};

// Supervised regression of the teacher's actions onto student features (MSE).
inline DistillResult distill_student(const DistillDataset& ds, const DistillConfig& cfg,
                                     std::uint64_t seed) {
  const int n = int(ds.features.rows());
  const int in_dim = int(ds.features.cols());
  const int out_dim = int(ds.labels.cols());
  if (n < 10) throw std::invalid_argument("distill_student: dataset too small");

  DistillResult res;
  res.norm = Normalizer(in_dim);
  for (int i = 0; i < n; ++i) res.norm.observe(ds.features.row(i).transpose());
  res.norm.freeze();
  MatX X(n, in_dim);
  for (int i = 0; i < n; ++i)
    X.row(i) = res.norm.apply(ds.features.row(i).transpose()).transpose();

  // Deterministic split: every k-th sample held out.
  const int k_hold = std::max(2, int(1.0 / std::max(cfg.holdout_fraction, 1e-3)));
  std::vector<int> train_idx, hold_idx;
  for (int i = 0; i < n; ++i) (i % k_hold == 0 ? hold_idx : train_idx).push_back(i);

  Rng rng(mix_seed(seed, 0xd15711));
  res.student = Mlp::make({in_dim, 32, 32, 32, out_dim}, Mlp::Head::Sigmoid, rng, true);
  Adam opt(cfg.lr);

  std::vector<int> order = train_idx;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += size_t(cfg.minibatch)) {
      const int m = int(std::min(size_t(cfg.minibatch), order.size() - start));
      MatX xb(m, in_dim), yb(m, out_dim);
      for (int j = 0; j < m; ++j) {
        xb.row(j) = X.row(order[start + size_t(j)]);
        yb.row(j) = ds.labels.row(order[start + size_t(j)]);
      }
      Mlp::Cache cache;
      const MatX pred = res.student.forward(xb, &cache, true);
      const MatX err = pred - yb;
      Mlp::Grads grads = Mlp::Grads::zeros_like(res.student);
      res.student.backward(cache, err * (2.0 / double(m)), true, grads);
      opt.step(res.student, grads);
    }
  }

  auto mse_over = [&](const std::vector<int>& which) {
    if (which.empty()) return 0.0;
    double acc = 0.0;
    for (int i : which) {
      const VecX pred = res.student.forward1(X.row(i).transpose());
      acc += (pred - ds.labels.row(i).transpose()).squaredNorm();
    }
    return acc / (double(which.size()) * out_dim);
  };
  res.train_mse = mse_over(train_idx);
  res.holdout_mse = mse_over(hold_idx);
  return res;
}

}  // namespace vicsim
