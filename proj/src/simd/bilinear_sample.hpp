#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "kfpso/simd/kernels.hpp"

namespace kfpso::simd::detail {

// Reference bilinear sample at row position j. The vector kernels reproduce
// this operation sequence lane by lane and use it for their tails.
inline void bilinear_sample(const WarpRowArgs& a, std::size_t j) {
  const double umax = static_cast<double>(a.width - 1);
  const double vmax = static_cast<double>(a.height - 1);
  const double jd = static_cast<double>(j);
  const double u = a.u0 + jd * a.du;
  const double v = a.v0 + jd * a.dv;
  const bool ok = u >= 0.0 && u <= umax && v >= 0.0 && v <= vmax;
  const double uc = std::min(std::max(u, 0.0), umax);
  const double vc = std::min(std::max(v, 0.0), vmax);
  const double iu = std::min(std::floor(uc), static_cast<double>(a.width - 2));
  const double iv = std::min(std::floor(vc), static_cast<double>(a.height - 2));
  const double fx = uc - iu;
  const double fy = vc - iv;
  const std::size_t base = static_cast<std::size_t>(iv) * a.width + static_cast<std::size_t>(iu);
  const double i00 = a.image[base];
  const double i10 = a.image[base + 1];
  const double i01 = a.image[base + a.width];
  const double i11 = a.image[base + a.width + 1];
  const double gx = 1.0 - fx;
  const double gy = 1.0 - fy;
  double s = (gx * gy) * i00;
  s = s + (fx * gy) * i10;
  s = s + (gx * fy) * i01;
  s = s + (fx * fy) * i11;
  a.out[j] = ok ? s : 0.0;
  a.valid[j] = ok ? 1 : 0;
}

inline void swarm_step_element(const SwarmStepArgs& a, std::size_t k, std::size_t d) {
  const double x = a.positions[k];
  double v = a.inertia * a.velocities[k];
  v = v + (a.c_personal * a.r_personal[k]) * (a.personal_best[k] - x);
  v = v + (a.c_global * a.r_global[k]) * (a.global_best[d] - x);
  v = v + (a.c_theta * a.r_theta[k]) * (a.theta[d] - x);
  const double y = x + v;
  const double c = std::min(std::max(y, a.lower[d]), a.upper[d]);
  a.velocities[k] = c == y ? v : 0.0;
  a.positions[k] = c;
}

}  // namespace kfpso::simd::detail
