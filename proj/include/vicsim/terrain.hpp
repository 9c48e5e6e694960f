#pragma once

#include <stdexcept>
#include <vector>

#include "vicsim/dynamics.hpp"
#include "vicsim/math.hpp"

namespace vicsim {

// Canonical wall geometry: the nominal sliding plane is x = 0 with free space at
// x < 0. The sliding axis runs along -z (parallel to gravity) and arclength s
// increases along it. Patch heights raise the surface toward free space.

struct Patch {
  double start_s = 0.0;  // m
  double end_s = 0.0;    // m
  double height = 0.0;   // m, offset toward free space
  double mu = 0.0;       // friction coefficient

  void validate() const {
    if (!(end_s > start_s)) throw std::invalid_argument("Patch: end_s must be > start_s");
    if (mu < 0.0) throw std::invalid_argument("Patch: mu must be >= 0");
  }
};

struct ContactParams {
  double k_n = 500.0;   // N/m
  double c_n = 50.0;    // N s/m
  double v_reg = 0.01;  // m/s

  void validate() const {
    if (!(k_n > 0.0) || c_n < 0.0 || !(v_reg > 0.0))
      throw std::invalid_argument("ContactParams: k_n > 0, c_n >= 0, v_reg > 0 required");
  }
};

struct SurfaceSample {
  double height = 0.0;
  double mu = 0.0;
  Vec3 n_perp = Vec3(-1.0, 0.0, 0.0);  // outward unit normal, world
};

enum class TerrainMode { PatchList, ProceduralHeightmap };

class Terrain {
 public:
  Terrain() = default;

  static Terrain from_patches(std::vector<Patch> patches, double plane_offset = 0.0) {
    Terrain t;
    t.mode_ = TerrainMode::PatchList;
    t.patches_ = std::move(patches);
    t.plane_offset_ = plane_offset;
    if (t.patches_.empty()) throw std::invalid_argument("Terrain: empty patch list");
    for (std::size_t i = 0; i < t.patches_.size(); ++i) {
      t.patches_[i].validate();
      if (i > 0 && std::abs(t.patches_[i].start_s - t.patches_[i - 1].end_s) > 1e-12)
        throw std::invalid_argument("Terrain: patches must be contiguous");
    }
    return t;
  }

  // Uniform cells of piecewise-constant height along s; per-cell mu supplied by caller.
  static Terrain from_heightmap(double s_begin, double cell_size, std::vector<double> heights,
                                std::vector<double> mus, double plane_offset = 0.0) {
    if (!(cell_size > 0.0)) throw std::invalid_argument("Terrain: cell_size must be > 0");
    if (heights.empty() || heights.size() != mus.size())
      throw std::invalid_argument("Terrain: heights/mus size mismatch");
    Terrain t;
    t.mode_ = TerrainMode::ProceduralHeightmap;
    t.hm_begin_ = s_begin;
    t.cell_size_ = cell_size;
    t.heights_ = std::move(heights);
    t.mus_ = std::move(mus);
    t.plane_offset_ = plane_offset;
    return t;
  }

  TerrainMode mode() const { return mode_; }
  double plane_offset() const { return plane_offset_; }

  double span_begin() const {
    return mode_ == TerrainMode::PatchList ? patches_.front().start_s : hm_begin_;
  }
  double span_end() const {
    return mode_ == TerrainMode::PatchList ? patches_.back().end_s
                                           : hm_begin_ + cell_size_ * double(heights_.size());
  }
  bool in_span(double s) const { return s >= span_begin() && s <= span_end(); }

  // World point -> (s, depth): s along the sliding axis, depth positive into the wall.
  void to_plane(const Vec3& p, double& s, double& depth) const {
    s = -p.z();
    depth = p.x() - plane_offset_;
  }
  Vec3 slide_dir() const { return Vec3(0.0, 0.0, -1.0); }
  Vec3 plane_normal() const { return Vec3(-1.0, 0.0, 0.0); }

  SurfaceSample query(double s) const {
    if (!in_span(s)) throw std::out_of_range("Terrain::query: s outside span");
    SurfaceSample out;
    if (mode_ == TerrainMode::PatchList) {
      const Patch& p = patch_at(s);
      out.height = p.height;
      out.mu = p.mu;
      out.n_perp = plane_normal();
    } else {
      const std::size_t i = cell_index(s);
      out.height = heights_[i];
      out.mu = mus_[i];
      // Central-difference slope tilts the nominal normal along the slide axis.
      const double hp = heights_[i + 1 < heights_.size() ? i + 1 : i];
      const double hm = heights_[i > 0 ? i - 1 : i];
      const double slope = (hp - hm) / (2.0 * cell_size_);
      out.n_perp = (plane_normal() - slope * slide_dir()).normalized();
    }
    return out;
  }

  // Height of the region just before s in the slide direction, and the border
  // location; used for step-face contact. Returns false at the span start.
  bool previous_region(double s, double& border_s, double& prev_height) const {
    if (mode_ == TerrainMode::PatchList) {
      const Patch& p = patch_at(s);
      if (p.start_s <= span_begin() + 1e-12) return false;
      border_s = p.start_s;
      prev_height = patch_at(p.start_s - 1e-9).height;
      return true;
    }
    const std::size_t i = cell_index(s);
    if (i == 0) return false;
    border_s = hm_begin_ + cell_size_ * double(i);
    prev_height = heights_[i - 1];
    return true;
  }

  const std::vector<Patch>& patches() const { return patches_; }
  double cell_size() const { return cell_size_; }
  const std::vector<double>& cell_heights() const { return heights_; }
  const std::vector<double>& cell_mus() const { return mus_; }

 private:
  const Patch& patch_at(double s) const {
    for (const Patch& p : patches_)
      if (s >= p.start_s && s < p.end_s) return p;
    return patches_.back();  // s == end_s
  }
  std::size_t cell_index(double s) const {
    const double u = (s - hm_begin_) / cell_size_;
    auto i = static_cast<std::ptrdiff_t>(u);
    i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(heights_.size()) - 1);
    return static_cast<std::size_t>(i);
  }

  TerrainMode mode_ = TerrainMode::PatchList;
  std::vector<Patch> patches_;
  double hm_begin_ = 0.0;
  double cell_size_ = 0.1;
  std::vector<double> heights_;
  std::vector<double> mus_;
  double plane_offset_ = 0.0;
};

struct ContactResult {
  bool in_contact = false;
  Vec3 p_C = Vec3::Zero();               // m, world
  Vec3 n_perp = Vec3(-1.0, 0.0, 0.0);    // unit, world
  double penetration = 0.0;              // m, >= 0 when in contact
  double separation = 0.0;               // m, tip-surface distance when not in contact
  double F_perp = 0.0;                   // N, >= 0
  double F_par = 0.0;                    // N, <= 0 along the tangential velocity
  double v_t = 0.0;                      // m/s, tangential speed (>= 0)
  double mu = 0.0;
  Wrench wrench_body = Wrench::zero(Frame::Body);
};

// Penalty normal force with tanh-regularized Coulomb friction at the single tip
// contact point. A raised region entered from the side blocks the tip with a
// vertical face; the smaller of the two penetrations selects the active face.
inline ContactResult compute_contact(const RobotState& state, const BodyParams& params,
                                     const Terrain& terrain, const ContactParams& cp) {
  ContactResult res;
  const Vec3 p_tip = state.tip_position(params);
  const Vec3 v_tip = state.tip_velocity(params);

  double s = 0.0, depth = 0.0;
  terrain.to_plane(p_tip, s, depth);
  if (!terrain.in_span(s)) return res;  // out-of-span tip: no contact

  const SurfaceSample surf = terrain.query(s);
  const double pen_top = depth + surf.height;
  if (pen_top <= 0.0) {
    res.separation = -pen_top;
    res.p_C = p_tip;
    res.n_perp = surf.n_perp;
    res.mu = surf.mu;
    return res;
  }

  Vec3 n_use = surf.n_perp;
  double pen = pen_top;
  double border_s = 0.0, prev_h = 0.0;
  if (terrain.previous_region(s, border_s, prev_h) && prev_h < surf.height) {
    const double pen_face = s - border_s;
    if (pen_face < pen_top) {  // tip entered the raised region from the side
      n_use = -terrain.slide_dir();
      pen = pen_face;
    }
  }

  const double pen_rate = -v_tip.dot(n_use);
  const double f_perp = std::max(0.0, cp.k_n * pen + cp.c_n * pen_rate);
  const Vec3 v_tan = v_tip - v_tip.dot(n_use) * n_use;
  const double vt = v_tan.norm();
  const double f_par = -surf.mu * f_perp * std::tanh(vt / cp.v_reg);

  Vec3 f_world = f_perp * n_use;
  if (vt > 1e-12) f_world += f_par * (v_tan / vt);

  const Mat3 r = state.rotation();
  const Vec3 f_body = r.transpose() * f_world;
  const Vec3 lever_body = params.r_end - params.r_com;

  res.in_contact = true;
  res.p_C = p_tip;
  res.n_perp = n_use;
  res.penetration = pen;
  res.F_perp = f_perp;
  res.F_par = f_par;
  res.v_t = vt;
  res.mu = surf.mu;
  res.wrench_body = Wrench{f_body, lever_body.cross(f_body), Frame::Body};
  return res;
}

}  // namespace vicsim
