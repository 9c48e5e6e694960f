#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "vicsim/control.hpp"
#include "vicsim/terrain.hpp"

namespace vicsim {

struct TrajectorySpec {
  double delta = 0.07;          // m, penetration level behind the nominal plane
  double speed = 0.2;           // m/s
  double slide_duration = 15.0; // s
  double approach_duration = 3.0;
  double standoff = 0.15;       // m, tip distance from the plane at t = 0
  double blend_time = 1.0;      // s, velocity blend into / out of the slide

  double length() const { return speed * slide_duration; }
  void validate() const {
    if (!(delta > 0.0)) throw std::invalid_argument("TrajectorySpec: delta must be > 0");
    if (speed < 0.0) throw std::invalid_argument("TrajectorySpec: speed must be >= 0");
  }
};

enum class ScenarioKind { FlatHeterogeneous, StepTerrain, RockLike };

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::FlatHeterogeneous;
  std::vector<double> friction_set = {0.05, 0.15, 0.25, 0.45, 0.55, 0.62};
  double patch_length = 0.5;     // m, flat / step training patches
  double step_height = 0.0;      // m
  bool step_alternating = false; // training terrain vs single eval step
  double step_position = 0.35;   // fraction of slide length (single-step mode)
  double step_mu = 0.1;          // uniform mu for step terrains
  double rock_amplitude = 0.02;  // m
  double rock_cell_size = 0.1;   // m
  double mu_resample_period = 4.0; // s of trajectory per friction draw
  double plane_offset = 0.0;     // m, map-error jitter of the true plane
  TrajectorySpec trajectory;

  void validate() const {
    if (friction_set.empty()) throw std::invalid_argument("ScenarioSpec: empty friction set");
    for (double mu : friction_set)
      if (mu < 0.0) throw std::invalid_argument("ScenarioSpec: mu must be >= 0");
    trajectory.validate();
  }
};

namespace detail {
inline double terrain_span_begin() { return -0.5; }
inline double terrain_span_end(const TrajectorySpec& t) { return t.length() + 0.8; }
}  // namespace detail

// Contiguous equal-length flat patches, mu drawn uniformly from the set.
inline Terrain make_flat_heterogeneous(const std::vector<double>& friction_set, Rng& rng,
                                       const TrajectorySpec& traj, double patch_length = 0.5,
                                       double plane_offset = 0.0) {
  if (friction_set.empty()) throw std::invalid_argument("make_flat_heterogeneous: empty set");
  const double s0 = detail::terrain_span_begin();
  const double s1 = detail::terrain_span_end(traj);
  const int n = std::max(1, int(std::ceil((s1 - s0) / patch_length)));
  std::uniform_int_distribution<std::size_t> pick(0, friction_set.size() - 1);
  std::vector<Patch> patches;
  for (int i = 0; i < n; ++i) {
    Patch p;
    p.start_s = s0 + (s1 - s0) * double(i) / n;
    p.end_s = s0 + (s1 - s0) * double(i + 1) / n;
    p.height = 0.0;
    p.mu = friction_set[pick(rng)];
    patches.push_back(p);
  }
  return Terrain::from_patches(std::move(patches), plane_offset);
}

// Three-span low | high | low friction surface used for the transfer comparison.
inline Terrain make_flat_triple(double mu_low, double mu_high, const TrajectorySpec& traj,
                                double plane_offset = 0.0) {
  const double s0 = detail::terrain_span_begin();
  const double s1 = detail::terrain_span_end(traj);
  const double a = traj.length() / 3.0;
  const double b = 2.0 * traj.length() / 3.0;
  std::vector<Patch> patches = {
      {s0, a, 0.0, mu_low}, {a, b, 0.0, mu_high}, {b, s1, 0.0, mu_low}};
  return Terrain::from_patches(std::move(patches), plane_offset);
}

// Flat run, then a raised surface whose face blocks the end effector.
inline Terrain make_step_terrain(double step_height, const ScenarioSpec& sc) {
  if (step_height < 0.0) throw std::invalid_argument("make_step_terrain: height must be >= 0");
  const double s0 = detail::terrain_span_begin();
  const double s1 = detail::terrain_span_end(sc.trajectory);
  if (step_height == 0.0)
    return Terrain::from_patches({{s0, s1, 0.0, sc.step_mu}}, sc.plane_offset);
  if (!sc.step_alternating) {
    const double s_step = sc.step_position * sc.trajectory.length();
    return Terrain::from_patches(
        {{s0, s_step, 0.0, sc.step_mu}, {s_step, s1, step_height, sc.step_mu}},
        sc.plane_offset);
  }
  // Neighbouring patches with the given height difference.
  std::vector<Patch> patches;
  const int n = std::max(2, int(std::ceil((s1 - s0) / sc.patch_length)));
  for (int i = 0; i < n; ++i) {
    Patch p;
    p.start_s = s0 + (s1 - s0) * double(i) / n;
    p.end_s = s0 + (s1 - s0) * double(i + 1) / n;
    p.height = (i % 2 == 1) ? step_height : 0.0;
    p.mu = sc.step_mu;
    patches.push_back(p);
  }
  return Terrain::from_patches(std::move(patches), sc.plane_offset);
}

// Heightmap terrain from seeded, smoothed noise; mu piecewise constant over
// spans of speed * period.
inline Terrain make_rocklike(std::uint64_t seed, const std::vector<double>& friction_set,
                             double period_s, const ScenarioSpec& sc) {
  if (!(period_s > 0.0)) throw std::invalid_argument("make_rocklike: period must be > 0");
  if (friction_set.empty()) throw std::invalid_argument("make_rocklike: empty friction set");
  const TrajectorySpec& traj = sc.trajectory;
  const double s0 = detail::terrain_span_begin();
  const double s1 = detail::terrain_span_end(traj);
  const int n = std::max(3, int(std::ceil((s1 - s0) / sc.rock_cell_size)));

  Rng rng(mix_seed(seed, 0x7e5a));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> raw(n);
  for (double& h : raw) h = u(rng);
  // 3-cell moving average, scaled so peaks reach the requested amplitude.
  std::vector<double> heights(n);
  for (int i = 0; i < n; ++i) {
    const double a = raw[std::max(0, i - 1)];
    const double b = raw[i];
    const double c = raw[std::min(n - 1, i + 1)];
    heights[i] = sc.rock_amplitude * (a + b + c) / 3.0;
  }
  const double mu_span = std::max(traj.speed * period_s, sc.rock_cell_size);
  std::uniform_int_distribution<std::size_t> pick(0, friction_set.size() - 1);
  std::vector<double> mus(n);
  double current_mu = friction_set[pick(rng)];
  double next_resample = s0 + mu_span;
  for (int i = 0; i < n; ++i) {
    const double s = s0 + (double(i) + 0.5) * (s1 - s0) / n;
    if (s >= next_resample) {
      current_mu = friction_set[pick(rng)];
      next_resample += mu_span;
    }
    mus[i] = current_mu;
  }
  return Terrain::from_heightmap(s0, (s1 - s0) / n, std::move(heights), std::move(mus),
                                 sc.plane_offset);
}

inline Terrain make_terrain(const ScenarioSpec& sc, Rng& rng) {
  switch (sc.kind) {
    case ScenarioKind::FlatHeterogeneous:
      return make_flat_heterogeneous(sc.friction_set, rng, sc.trajectory, sc.patch_length,
                                     sc.plane_offset);
    case ScenarioKind::StepTerrain:
      return make_step_terrain(sc.step_height, sc);
    case ScenarioKind::RockLike: {
      std::uniform_int_distribution<std::uint64_t> d;
      return make_rocklike(d(rng), sc.friction_set, sc.mu_resample_period, sc);
    }
  }
  throw std::logic_error("make_terrain: unknown scenario kind");
}

// Time-indexed reference built from the NOMINAL plane only. Approach ramps the
// tip from the standoff to delta behind the plane and blends the slide velocity
// in before the slide phase, so position is C^1 throughout.
class ReferenceTrajectory {
 public:
  ReferenceTrajectory() = default;
  ReferenceTrajectory(const TrajectorySpec& spec, const Vec3& r_end) : spec_(spec), r_end_(r_end) {
    spec_.validate();
  }

  double slide_start() const { return spec_.approach_duration; }
  double slide_end() const { return spec_.approach_duration + spec_.slide_duration; }
  double total_duration() const { return slide_end() + spec_.blend_time; }

  Reference at(double t) const {
    const double ta = spec_.approach_duration;
    const double tb = std::min(spec_.blend_time, ta);
    const double ramp_end = 0.8 * ta;

    // Tip x: standoff -> delta, smoothstep over [0, ramp_end].
    double x, vx, ax;
    eval_smoothstep(t, 0.0, ramp_end, -spec_.standoff, spec_.delta, x, vx, ax);

    // Tip z: velocity blends 0 -> -speed over [ta - tb, ta], constant during the
    // slide, then blends back to 0 after slide_end.
    double z = 0.0, vz = 0.0, az = 0.0;
    const double v = spec_.speed;
    const double z_blend = -0.5 * v * tb;  // z at slide start
    if (t <= ta - tb) {
      z = 0.0;
    } else if (t <= ta) {
      const double u = t - (ta - tb);
      vz = -v * u / tb;
      z = -0.5 * v * u * u / tb;
      az = -v / tb;
    } else if (t <= slide_end()) {
      vz = -v;
      z = z_blend - v * (t - ta);
      az = 0.0;
    } else {
      const double u = std::min(t - slide_end(), tb);
      vz = -v * (1.0 - u / tb);
      z = z_blend - v * spec_.slide_duration - v * u + 0.5 * v * u * u / tb;
      az = (t - slide_end() < tb) ? v / tb : 0.0;
    }

    Reference ref;
    ref.att_ref = Quat::Identity();  // zero pitch and roll, tool arm into the wall
    ref.ang_vel_ref = Vec3::Zero();
    const Vec3 tip(x, 0.0, z);
    ref.pos_ref = tip - ref.att_ref.toRotationMatrix() * r_end_;
    ref.vel_ref = Vec3(vx, 0.0, vz);
    ref.acc_ref = Vec3(ax, 0.0, az);
    return ref;
  }

  const TrajectorySpec& spec() const { return spec_; }

 private:
  static void eval_smoothstep(double t, double t0, double t1, double a, double b, double& p,
                              double& v, double& acc) {
    if (t <= t0) {
      p = a;
      v = acc = 0.0;
      return;
    }
    if (t >= t1) {
      p = b;
      v = acc = 0.0;
      return;
    }
    const double T = t1 - t0;
    const double u = (t - t0) / T;
    const double s = u * u * (3.0 - 2.0 * u);
    const double ds = 6.0 * u * (1.0 - u) / T;
    const double dds = (6.0 - 12.0 * u) / (T * T);
    p = a + (b - a) * s;
    v = (b - a) * ds;
    acc = (b - a) * dds;
  }

  TrajectorySpec spec_;
  Vec3 r_end_ = Vec3(0.45, 0.0, 0.0);
};

inline ScenarioSpec scenario_preset(const std::string& name) {
  ScenarioSpec sc;
  if (name == "flat6") {
    sc.kind = ScenarioKind::FlatHeterogeneous;
  } else if (name == "flat3wsw") {
    sc.kind = ScenarioKind::FlatHeterogeneous;
    sc.friction_set = {0.05, 0.62};  // terrain built by make_flat_triple in the harness
  } else if (name == "step1cm") {
    sc.kind = ScenarioKind::StepTerrain;
    sc.step_height = 0.01;
    sc.step_alternating = true;
  } else if (name == "step2cm") {
    sc.kind = ScenarioKind::StepTerrain;
    sc.step_height = 0.02;
    sc.step_alternating = true;
  } else if (name == "step2cm-eval") {
    sc.kind = ScenarioKind::StepTerrain;
    sc.step_height = 0.02;
    sc.step_alternating = false;
  } else if (name == "rock") {
    sc.kind = ScenarioKind::RockLike;
    sc.friction_set = {0.1, 0.15, 0.45, 0.6, 0.75, 0.9};
  } else {
    throw std::invalid_argument("unknown scenario preset: " + name);
  }
  return sc;
}

}  // namespace vicsim
