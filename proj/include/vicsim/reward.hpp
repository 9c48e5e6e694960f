#pragma once

#include "vicsim/math.hpp"

namespace vicsim {

struct RewardWeights {
  double l_eR = 10.0;
  double l_p = 10.0;
  double l_d = 100.0;
  double l_omega = 0.1;
  double l_a = 1.0;
  double fault_penalty = 10.0;  // terminal penalty on faulted episodes

  void validate() const {
    if (l_eR < 0 || l_p < 0 || l_d < 0 || l_omega < 0 || l_a < 0 || fault_penalty < 0)
      throw std::invalid_argument("RewardWeights: weights must be >= 0");
  }
};

struct RewardTerms {
  double att = 0.0;
  double pos = 0.0;
  double dist = 0.0;
  double omega = 0.0;
  double smooth = 0.0;
  double total() const { return att + pos + dist + omega + smooth; }

  RewardTerms& operator+=(const RewardTerms& o) {
    att += o.att;
    pos += o.pos;
    dist += o.dist;
    omega += o.omega;
    smooth += o.smooth;
    return *this;
  }
  RewardTerms& operator*=(double s) {
    att *= s;
    pos *= s;
    dist *= s;
    omega *= s;
    smooth *= s;
    return *this;
  }
};

// Quadratic penalty reward. d is the tip-surface separation along the contact
// frame x-axis, 0 while in contact. Actions with near-zero norm reuse the
// previous direction so the smoothness term stays defined.
inline double compute_reward(const Vec3& e_R, const Vec3& e_p, double d, const Vec3& omega,
                             const VecX& a_t, const VecX& a_prev, const RewardWeights& w,
                             RewardTerms* terms = nullptr) {
  RewardTerms t;
  t.att = -w.l_eR * e_R.squaredNorm();
  t.pos = -w.l_p * e_p.squaredNorm();
  t.dist = -w.l_d * d * d;
  t.omega = -w.l_omega * omega.squaredNorm();
  const double na = a_t.norm();
  const double np = a_prev.norm();
  if (na > 1e-6 && np > 1e-6)
    t.smooth = -w.l_a * (a_t / na - a_prev / np).squaredNorm();
  if (terms) *terms = t;
  return t.total();
}

}  // namespace vicsim
