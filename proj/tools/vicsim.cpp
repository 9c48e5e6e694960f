#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "vicsim/harness.hpp"
#include "vicsim/svg.hpp"

namespace fs = std::filesystem;
using namespace vicsim;

namespace {

struct CommonArgs {
  std::string config;
  std::string scenario;
  std::string out = "out";
  std::string checkpoint;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int parallel = 0;
  bool deterministic = false;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "run configuration file (json, supports \"inherit\")");
  cmd->add_option("--scenario", a.scenario, "scenario preset override");
  cmd->add_option("--out", a.out, "output directory");
  cmd->add_option("--seed", a.seed, "random seed override")->each([&a](const std::string&) {
    a.seed_set = true;
  });
  cmd->add_option("--parallel", a.parallel, "worker thread count override");
  cmd->add_flag("--deterministic", a.deterministic,
                "single-threaded execution (parallel results are identical anyway)");
}

RunConfig make_config(const CommonArgs& a) {
  RunConfig cfg = load_run_config(a.config);
  if (!a.scenario.empty()) {
    cfg.scenario_preset = a.scenario;
    cfg.instance.scenario = scenario_preset(a.scenario);
  }
  if (a.seed_set) cfg.seed = a.seed;
  if (a.parallel > 0) cfg.parallel = a.parallel;
  if (a.deterministic) cfg.parallel = 1;
  if (!a.out.empty()) cfg.out_dir = a.out;
  fs::create_directories(cfg.out_dir);
  return cfg;
}

Mlp fresh_critic(int in_dim, Rng& rng) {
  return Mlp::make({in_dim, 32, 32, 32, 1}, Mlp::Head::Linear, rng);
}

int run_training(const RunConfig& cfg, std::vector<SimInstance>& envs, ActorCritic& ac,
                 ObsMode mode, const std::string& csv_path, const std::string& ckpt_path) {
  std::ofstream csv(csv_path);
  csv << training_csv_header() << "\n";
  const auto progress = [&](const TrainProgress& p) {
    csv << training_csv_row(p) << "\n";
    csv.flush();
    if (p.epoch % 10 == 0)
      std::cout << "epoch " << p.epoch << " return " << p.mean_return << " fault_rate "
                << p.fault_rate << "\n";
    if (p.epoch % 50 == 49)
      save_checkpoint(ac, envs.front().config().gains.adapted_axes, ckpt_path);
  };
  train_ppo(envs, ac, mode, cfg.ppo, cfg.epochs, cfg.seed, cfg.parallel, progress);
  save_checkpoint(ac, envs.front().config().gains.adapted_axes, ckpt_path);
  std::cout << "saved " << ckpt_path << "\n";
  return 0;
}

int cmd_train_teacher(const CommonArgs& a) {
  RunConfig cfg = make_config(a);
  std::vector<SimInstance> envs = make_instances(cfg, cfg.n_instances, cfg.seed);
  Rng rng(mix_seed(cfg.seed, 0x7eac4e5));
  ActorCritic ac;
  const int in_dim = SimInstance::privileged_dim();
  const int act_dim = cfg.instance.gains.action_dim();
  ac.actor = Mlp::make({in_dim, 32, 32, 32, act_dim}, Mlp::Head::Sigmoid, rng, true);
  ac.critic = fresh_critic(in_dim, rng);
  ac.norm = Normalizer(in_dim);
  return run_training(cfg, envs, ac, ObsMode::Privileged, cfg.out_dir + "/teacher_training.csv",
                      cfg.out_dir + "/teacher.ckpt.json");
}

int cmd_distill(const CommonArgs& a) {
  RunConfig cfg = make_config(a);
  std::vector<SimInstance> envs = make_instances(cfg, cfg.n_instances, cfg.seed);

  TeacherSpec teacher;
  teacher.handcrafted = cfg.teacher;
  if (!a.checkpoint.empty()) {
    ActorCritic tac = load_checkpoint(a.checkpoint);
    teacher.kind = TeacherKind::LearnedPrivileged;
    teacher.net = tac.actor;
    teacher.norm = tac.norm;
  }
  std::cout << "collecting teacher rollouts (" << cfg.n_instances << " instances x "
            << cfg.teacher_passes << " passes)\n";
  const DistillDataset ds =
      collect_teacher_dataset(envs, teacher, cfg.teacher_passes, cfg.seed, cfg.parallel);
  std::cout << "dataset: " << ds.features.rows() << " samples\n";
  const DistillResult res = distill_student(ds, cfg.distill, cfg.seed);
  std::cout << "train mse " << res.train_mse << " holdout mse " << res.holdout_mse << "\n";

  ActorCritic ac;
  ac.actor = res.student;
  Rng rng(mix_seed(cfg.seed, 0xc7171c));
  ac.critic = fresh_critic(res.student.in_dim(), rng);
  ac.norm = res.norm;
  const std::string ckpt = cfg.out_dir + "/student.ckpt.json";
  save_checkpoint(ac, cfg.instance.gains.adapted_axes, ckpt);
  std::ofstream(cfg.out_dir + "/distill_report.csv")
      << "train_mse[v1],holdout_mse,samples\n"
      << format_number(res.train_mse) << ',' << format_number(res.holdout_mse) << ','
      << ds.features.rows() << "\n";
  std::cout << "saved " << ckpt << "\n";
  return 0;
}

int cmd_finetune(const CommonArgs& a) {
  RunConfig cfg = make_config(a);
  if (a.checkpoint.empty()) throw CLI::ValidationError("finetune requires --checkpoint");
  ActorCritic ac = load_checkpoint(a.checkpoint);
  if (!ac.actor.has_log_std) {
    ac.actor.has_log_std = true;
    ac.actor.log_std = VecX::Constant(ac.actor.out_dim(), std::log(0.2));
  }
  if (ac.critic.dims.empty()) {
    Rng rng(mix_seed(cfg.seed, 0xf17e));
    ac.critic = fresh_critic(ac.actor.in_dim(), rng);
  }
  std::vector<SimInstance> envs = make_instances(cfg, cfg.n_instances, cfg.seed);
  return run_training(cfg, envs, ac, ObsMode::Student, cfg.out_dir + "/finetune_training.csv",
                      cfg.out_dir + "/student_finetuned.ckpt.json");
}

int cmd_eval(const CommonArgs& a, const std::string& controller_kind) {
  RunConfig cfg = make_config(a);
  Controller ctrl;
  ActorCritic ac;
  if (controller_kind == "policy") {
    if (a.checkpoint.empty()) throw CLI::ValidationError("--controller policy requires --checkpoint");
    ac = load_checkpoint(a.checkpoint);
    ctrl = policy_controller(ac);
  } else {
    ctrl = baseline_controller(cfg);
  }
  Rng rng(mix_seed(cfg.seed, 0x7e77a1));
  const Terrain terrain = build_terrain(cfg, rng);
  const EpisodeResult res = run_episode(cfg, terrain, ctrl, cfg.seed);
  const std::string log_path = cfg.out_dir + "/episode_" + controller_kind + ".csv";
  write_episode_log(res.log, log_path);
  std::ofstream(cfg.out_dir + "/metrics_" + controller_kind + ".csv")
      << "mean_tilt_deg[v1],rms_pitch_rate_rad_s,rms_position_error_m,rms_attitude_error,"
         "contact_loss_fraction,fault\n"
      << format_number(res.metrics.mean_tilt_deg) << ','
      << format_number(res.metrics.rms_pitch_rate) << ','
      << format_number(res.metrics.rms_position_error) << ','
      << format_number(res.metrics.rms_attitude_error) << ','
      << format_number(res.metrics.contact_loss_fraction) << ',' << (res.metrics.fault ? 1 : 0)
      << "\n";
  std::cout << "controller " << controller_kind << ": mean tilt "
            << res.metrics.mean_tilt_deg << " deg, rms pitch rate " << res.metrics.rms_pitch_rate
            << " rad/s, rms pos err " << res.metrics.rms_position_error << " m"
            << (res.fault ? " [FAULT]" : "") << "\n";
  std::cout << "wrote " << log_path << "\n";
  return res.fault ? 2 : 0;
}

int cmd_sweep(const CommonArgs& a, int repeats, int n_terrains) {
  RunConfig cfg = make_config(a);
  std::vector<Terrain> terrains;
  for (int i = 0; i < n_terrains; ++i) {
    Rng rng(mix_seed(cfg.seed, 0x5eeb + std::uint64_t(i)));
    terrains.push_back(build_terrain(cfg, rng));
  }
  ActorCritic ac;
  const bool with_policy = !a.checkpoint.empty();
  if (with_policy) ac = load_checkpoint(a.checkpoint);
  const auto rows = gain_sweep(cfg, terrains, with_policy ? &ac : nullptr, repeats, cfg.parallel);
  write_sweep_csv(rows, cfg.out_dir + "/sweep.csv");

  std::vector<PlotSeries> series;
  for (const auto& r : rows) {
    PlotSeries s;
    s.label = r.label + (r.any_fault ? " (fault)" : "");
    s.scatter = true;
    s.x.push_back(r.mean.rms_attitude_error);
    s.y.push_back(r.mean.rms_position_error);
    series.push_back(std::move(s));
  }
  PlotOptions opt;
  opt.title = "gain sweep: tracking errors";
  opt.x_label = "rms attitude error (log)";
  opt.y_label = "rms position error, m (log)";
  opt.log_x = opt.log_y = true;
  write_svg_plot(series, opt, cfg.out_dir + "/sweep_scatter.svg");
  std::cout << "wrote " << cfg.out_dir << "/sweep.csv and sweep_scatter.svg\n";
  for (const auto& r : rows)
    std::cout << r.label << ": rms_att " << r.mean.rms_attitude_error << " rms_pos "
              << r.mean.rms_position_error << " rms_pitch_rate " << r.mean.rms_pitch_rate
              << (r.any_fault ? " [FAULT]" : "") << "\n";
  return 0;
}

int cmd_plot(const std::string& csv_path, const std::string& x_col,
             std::vector<std::string> y_cols, const std::string& svg_path, bool log_y) {
  const CsvTable t = read_csv(csv_path);
  const int xi = x_col.empty() ? 0 : t.column_index(x_col);
  if (y_cols.empty())
    for (std::size_t c = 0; c < t.columns.size(); ++c)
      if (int(c) != xi && y_cols.size() < 4) y_cols.push_back(t.columns[c]);
  std::vector<PlotSeries> series;
  for (const auto& name : y_cols) {
    PlotSeries s;
    s.label = name;
    const int yi = t.column_index(name);
    for (const auto& row : t.rows) {
      s.x.push_back(row[size_t(xi)]);
      s.y.push_back(row[size_t(yi)]);
    }
    series.push_back(std::move(s));
  }
  PlotOptions opt;
  opt.title = fs::path(csv_path).filename().string();
  opt.x_label = t.columns[size_t(xi)];
  opt.log_y = log_y;
  write_svg_plot(series, opt, svg_path);
  std::cout << "wrote " << svg_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"variable-impedance sliding simulator"};
  app.require_subcommand(1);

  CommonArgs a_teacher, a_distill, a_finetune, a_eval, a_sweep;
  std::string controller_kind = "baseline";
  int sweep_repeats = 3, sweep_terrains = 2;
  std::string plot_csv, plot_x, plot_svg = "plot.svg";
  std::vector<std::string> plot_y;
  bool plot_log_y = false;

  auto* c_teacher = app.add_subcommand("train-teacher", "train a privileged-observation policy");
  add_common(c_teacher, a_teacher);

  auto* c_distill = app.add_subcommand("distill", "distill a teacher into a student policy");
  add_common(c_distill, a_distill);
  c_distill->add_option("--checkpoint", a_distill.checkpoint,
                        "learned teacher checkpoint (default: handcrafted teacher)");

  auto* c_finetune = app.add_subcommand("finetune", "fine-tune a student policy with RL");
  add_common(c_finetune, a_finetune);
  c_finetune->add_option("--checkpoint", a_finetune.checkpoint, "student checkpoint to start from");

  auto* c_eval = app.add_subcommand("eval", "run one evaluation episode and write its log");
  add_common(c_eval, a_eval);
  c_eval->add_option("--controller", controller_kind, "baseline or policy")
      ->check(CLI::IsMember({"baseline", "policy"}));
  c_eval->add_option("--checkpoint", a_eval.checkpoint, "policy checkpoint");

  auto* c_sweep = app.add_subcommand("sweep", "constant-gain grid sweep (plus optional policy row)");
  add_common(c_sweep, a_sweep);
  c_sweep->add_option("--checkpoint", a_sweep.checkpoint, "policy checkpoint for the extra row");
  c_sweep->add_option("--repeats", sweep_repeats, "episodes per combination per terrain");
  c_sweep->add_option("--terrains", sweep_terrains, "number of terrain draws");

  auto* c_plot = app.add_subcommand("plot", "render CSV columns to an SVG plot");
  c_plot->add_option("--in", plot_csv, "input CSV")->required();
  c_plot->add_option("--x", plot_x, "x column (default: first)");
  c_plot->add_option("--y", plot_y, "y columns");
  c_plot->add_option("--svg", plot_svg, "output SVG path");
  c_plot->add_flag("--log-y", plot_log_y, "log-scale y axis");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_teacher->parsed()) return cmd_train_teacher(a_teacher);
    if (c_distill->parsed()) return cmd_distill(a_distill);
    if (c_finetune->parsed()) return cmd_finetune(a_finetune);
    if (c_eval->parsed()) return cmd_eval(a_eval, controller_kind);
    if (c_sweep->parsed()) return cmd_sweep(a_sweep, sweep_repeats, sweep_terrains);
    if (c_plot->parsed()) return cmd_plot(plot_csv, plot_x, plot_y, plot_svg, plot_log_y);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
