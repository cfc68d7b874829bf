#include "kfpso/simd/kernels.hpp"

#include <arm_neon.h>

#include <algorithm>

#include "bilinear_sample.hpp"

namespace kfpso::simd::neon {

namespace {

// fmax/fmin order signed zeros; select explicitly to match std::max/std::min.
inline float64x2_t max_like_std(float64x2_t x, float64x2_t lo) {
  return vbslq_f64(vcltq_f64(x, lo), lo, x);
}

inline float64x2_t min_like_std(float64x2_t x, float64x2_t hi) {
  return vbslq_f64(vcltq_f64(hi, x), hi, x);
}

}  // namespace

void swarm_step(const SwarmStepArgs& a) {
  const std::size_t dim = a.lower.size();
  const std::size_t rows = a.positions.size() / dim;
  const float64x2_t w = vdupq_n_f64(a.inertia);
  const float64x2_t cp = vdupq_n_f64(a.c_personal);
  const float64x2_t cg = vdupq_n_f64(a.c_global);
  const float64x2_t ct = vdupq_n_f64(a.c_theta);
  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t off = i * dim;
    double* x = a.positions.data() + off;
    double* vel = a.velocities.data() + off;
    const double* pb = a.personal_best.data() + off;
    const double* rp = a.r_personal.data() + off;
    const double* rg = a.r_global.data() + off;
    const double* rt = a.r_theta.data() + off;
    std::size_t d = 0;
    for (; d + 2 <= dim; d += 2) {
      const float64x2_t xv = vld1q_f64(x + d);
      float64x2_t v = vmulq_f64(w, vld1q_f64(vel + d));
      v = vaddq_f64(v, vmulq_f64(vmulq_f64(cp, vld1q_f64(rp + d)), vsubq_f64(vld1q_f64(pb + d), xv)));
      v = vaddq_f64(v, vmulq_f64(vmulq_f64(cg, vld1q_f64(rg + d)),
                                 vsubq_f64(vld1q_f64(a.global_best.data() + d), xv)));
      v = vaddq_f64(v, vmulq_f64(vmulq_f64(ct, vld1q_f64(rt + d)),
                                 vsubq_f64(vld1q_f64(a.theta.data() + d), xv)));
      const float64x2_t moved = vaddq_f64(xv, v);
      const float64x2_t kept = min_like_std(max_like_std(moved, vld1q_f64(a.lower.data() + d)),
                                            vld1q_f64(a.upper.data() + d));
      const uint64x2_t inside = vceqq_f64(kept, moved);
      vst1q_f64(vel + d, vreinterpretq_f64_u64(vandq_u64(inside, vreinterpretq_u64_f64(v))));
      vst1q_f64(x + d, kept);
    }
    for (; d < dim; ++d) detail::swarm_step_element(a, off + d, d);
  }
}

void weighted_row_sum(std::span<const double> points, std::span<const double> weights,
                      std::span<double> out) {
  const std::size_t dim = out.size();
  std::fill(out.begin(), out.end(), 0.0);
  double* acc = out.data();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double* row = points.data() + i * dim;
    const float64x2_t w = vdupq_n_f64(weights[i]);
    std::size_t d = 0;
    for (; d + 2 <= dim; d += 2) {
      vst1q_f64(acc + d, vaddq_f64(vld1q_f64(acc + d), vmulq_f64(w, vld1q_f64(row + d))));
    }
    for (; d < dim; ++d) acc[d] = acc[d] + weights[i] * row[d];
  }
}

void warp_bilinear_row(const WarpRowArgs& a) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  const float64x2_t one = vdupq_n_f64(1.0);
  const float64x2_t umax = vdupq_n_f64(static_cast<double>(a.width - 1));
  const float64x2_t vmax = vdupq_n_f64(static_cast<double>(a.height - 1));
  const float64x2_t ilast = vdupq_n_f64(static_cast<double>(a.width - 2));
  const float64x2_t jlast = vdupq_n_f64(static_cast<double>(a.height - 2));
  const float64x2_t u0 = vdupq_n_f64(a.u0);
  const float64x2_t v0 = vdupq_n_f64(a.v0);
  const float64x2_t du = vdupq_n_f64(a.du);
  const float64x2_t dv = vdupq_n_f64(a.dv);
  const double* img = a.image.data();
  const std::size_t stride = a.width;

  const std::size_t n = a.out.size();
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    const double jd_arr[2] = {static_cast<double>(j), static_cast<double>(j) + 1.0};
    const float64x2_t jd = vld1q_f64(jd_arr);
    const float64x2_t u = vaddq_f64(u0, vmulq_f64(jd, du));
    const float64x2_t v = vaddq_f64(v0, vmulq_f64(jd, dv));
    const uint64x2_t ok = vandq_u64(vandq_u64(vcgeq_f64(u, zero), vcleq_f64(u, umax)),
                                    vandq_u64(vcgeq_f64(v, zero), vcleq_f64(v, vmax)));
    const float64x2_t uc = min_like_std(max_like_std(u, zero), umax);
    const float64x2_t vc = min_like_std(max_like_std(v, zero), vmax);
    const float64x2_t iu = min_like_std(vrndmq_f64(uc), ilast);
    const float64x2_t iv = min_like_std(vrndmq_f64(vc), jlast);
    const float64x2_t fx = vsubq_f64(uc, iu);
    const float64x2_t fy = vsubq_f64(vc, iv);

    double iu_arr[2];
    double iv_arr[2];
    vst1q_f64(iu_arr, iu);
    vst1q_f64(iv_arr, iv);
    double c00[2], c10[2], c01[2], c11[2];
    for (int l = 0; l < 2; ++l) {
      const std::size_t base =
          static_cast<std::size_t>(iv_arr[l]) * stride + static_cast<std::size_t>(iu_arr[l]);
      c00[l] = img[base];
      c10[l] = img[base + 1];
      c01[l] = img[base + stride];
      c11[l] = img[base + stride + 1];
    }
    const float64x2_t gx = vsubq_f64(one, fx);
    const float64x2_t gy = vsubq_f64(one, fy);
    float64x2_t s = vmulq_f64(vmulq_f64(gx, gy), vld1q_f64(c00));
    s = vaddq_f64(s, vmulq_f64(vmulq_f64(fx, gy), vld1q_f64(c10)));
    s = vaddq_f64(s, vmulq_f64(vmulq_f64(gx, fy), vld1q_f64(c01)));
    s = vaddq_f64(s, vmulq_f64(vmulq_f64(fx, fy), vld1q_f64(c11)));
    vst1q_f64(a.out.data() + j, vbslq_f64(ok, s, zero));
    a.valid[j] = vgetq_lane_u64(ok, 0) ? 1 : 0;
    a.valid[j + 1] = vgetq_lane_u64(ok, 1) ? 1 : 0;
  }
  for (; j < n; ++j) detail::bilinear_sample(a, j);
}

}  // namespace kfpso::simd::neon
