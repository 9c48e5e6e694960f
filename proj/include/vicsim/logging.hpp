#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "vicsim/env.hpp"

namespace vicsim {

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

// Fixed column schema; version token and units carried in the header names.
inline std::string episode_log_header() {
  return "time_s[v1],pos_x_m,pos_y_m,pos_z_m,quat_w,quat_x,quat_y,quat_z,"
         "ref_x_m,ref_y_m,ref_z_m,e_p_x_m,e_p_y_m,e_p_z_m,e_R_x,e_R_y,e_R_z,"
         "pitch_rad,pitch_rate_rad_s,tilt_rad,"
         "k_tx_N_m,k_ty_N_m,k_tz_N_m,k_rx_Nm_rad,k_ry_Nm_rad,k_rz_Nm_rad,"
         "a_tx,a_ty,a_tz,a_rx,a_ry,a_rz,"
         "F_perp_N,F_par_N,meas_F_perp_N,meas_F_par_N,in_contact,separation_m,"
         "r_att,r_pos,r_dist,r_omega,r_smooth,fault";
}

inline std::string episode_log_row(const LogRow& r) {
  std::ostringstream os;
  auto put = [&](double v) { os << ',' << format_number(v); };
  os << format_number(r.t);
  for (int i = 0; i < 3; ++i) put(r.pos(i));
  put(r.quat.w());
  put(r.quat.x());
  put(r.quat.y());
  put(r.quat.z());
  for (int i = 0; i < 3; ++i) put(r.ref_pos(i));
  for (int i = 0; i < 3; ++i) put(r.e_p(i));
  for (int i = 0; i < 3; ++i) put(r.e_R(i));
  put(r.pitch);
  put(r.pitch_rate);
  put(r.tilt);
  for (int i = 0; i < 6; ++i) put(r.gains(i));
  for (int i = 0; i < 6; ++i) put(r.action(i));
  put(r.F_perp);
  put(r.F_par);
  put(r.meas_F_perp);
  put(r.meas_F_par);
  os << ',' << (r.in_contact ? 1 : 0);
  put(r.separation);
  put(r.reward.att);
  put(r.reward.pos);
  put(r.reward.dist);
  put(r.reward.omega);
  put(r.reward.smooth);
  os << ',' << (r.fault ? 1 : 0);
  return os.str();
}

inline void write_episode_log(const std::vector<LogRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_episode_log: cannot open " + path);
  out << episode_log_header() << "\n";
  for (const auto& r : rows) out << episode_log_row(r) << "\n";
}

struct Metrics {
  double mean_tilt_deg = 0.0;
  double rms_pitch_rate = 0.0;
  double rms_position_error = 0.0;
  double rms_attitude_error = 0.0;
  double contact_loss_fraction = 0.0;
  bool fault = false;
};

// Metrics over [t0, t1]; contact-loss fraction over the sliding phase.
inline Metrics compute_metrics(const std::vector<LogRow>& rows, double slide_start,
                               double t0, double t1) {
  Metrics m;
  double tilt_acc = 0.0, pr_acc = 0.0, pos_acc = 0.0, att_acc = 0.0;
  int n_window = 0, n_slide = 0, n_loss = 0;
  for (const auto& r : rows) {
    if (r.fault) m.fault = true;
    if (r.t >= slide_start) {
      ++n_slide;
      if (!r.in_contact) ++n_loss;
    }
    if (r.t < t0 || r.t > t1) continue;
    ++n_window;
    tilt_acc += r.tilt;
    pr_acc += r.pitch_rate * r.pitch_rate;
    pos_acc += r.e_p.squaredNorm();
    att_acc += r.e_R.squaredNorm();
  }
  if (n_slide == 0) throw std::runtime_error("compute_metrics: empty sliding phase");
  if (n_window == 0) throw std::runtime_error("compute_metrics: empty metrics window");
  m.mean_tilt_deg = tilt_acc / n_window * 180.0 / M_PI;
  m.rms_pitch_rate = std::sqrt(pr_acc / n_window);
  m.rms_position_error = std::sqrt(pos_acc / n_window);
  m.rms_attitude_error = std::sqrt(att_acc / n_window);
  m.contact_loss_fraction = double(n_loss) / double(n_slide);
  return m;
}

// Minimal CSV reader (numeric columns) for the plot subcommand and tests.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return int(i);
    throw std::runtime_error("CsvTable: unknown column " + name);
  }
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path);
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty file");
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) t.columns.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace vicsim
