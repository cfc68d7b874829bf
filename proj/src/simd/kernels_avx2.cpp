#include "kfpso/simd/kernels.hpp"

#include <immintrin.h>

#include <algorithm>

#include "bilinear_sample.hpp"

namespace kfpso::simd::avx2 {

namespace {

// Same selection rule as std::max(x, lo) / std::min(x, hi), including the
// sign of zero: maxpd/minpd return the second operand on ties.
inline __m256d clamp(__m256d x, __m256d lo, __m256d hi) {
  return _mm256_min_pd(hi, _mm256_max_pd(lo, x));
}

}  // namespace

void swarm_step(const SwarmStepArgs& a) {
  const std::size_t dim = a.lower.size();
  const std::size_t rows = a.positions.size() / dim;
  const __m256d w = _mm256_set1_pd(a.inertia);
  const __m256d cp = _mm256_set1_pd(a.c_personal);
  const __m256d cg = _mm256_set1_pd(a.c_global);
  const __m256d ct = _mm256_set1_pd(a.c_theta);
  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t off = i * dim;
    double* x = a.positions.data() + off;
    double* vel = a.velocities.data() + off;
    const double* pb = a.personal_best.data() + off;
    const double* rp = a.r_personal.data() + off;
    const double* rg = a.r_global.data() + off;
    const double* rt = a.r_theta.data() + off;
    std::size_t d = 0;
    for (; d + 4 <= dim; d += 4) {
      const __m256d xv = _mm256_loadu_pd(x + d);
      __m256d v = _mm256_mul_pd(w, _mm256_loadu_pd(vel + d));
      v = _mm256_add_pd(v, _mm256_mul_pd(_mm256_mul_pd(cp, _mm256_loadu_pd(rp + d)),
                                         _mm256_sub_pd(_mm256_loadu_pd(pb + d), xv)));
      v = _mm256_add_pd(v, _mm256_mul_pd(_mm256_mul_pd(cg, _mm256_loadu_pd(rg + d)),
                                         _mm256_sub_pd(_mm256_loadu_pd(a.global_best.data() + d), xv)));
      v = _mm256_add_pd(v, _mm256_mul_pd(_mm256_mul_pd(ct, _mm256_loadu_pd(rt + d)),
                                         _mm256_sub_pd(_mm256_loadu_pd(a.theta.data() + d), xv)));
      const __m256d moved = _mm256_add_pd(xv, v);
      const __m256d kept = clamp(moved, _mm256_loadu_pd(a.lower.data() + d), _mm256_loadu_pd(a.upper.data() + d));
      _mm256_storeu_pd(vel + d, _mm256_and_pd(_mm256_cmp_pd(kept, moved, _CMP_EQ_OQ), v));
      _mm256_storeu_pd(x + d, kept);
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
    const __m256d w = _mm256_set1_pd(weights[i]);
    std::size_t d = 0;
    for (; d + 4 <= dim; d += 4) {
      _mm256_storeu_pd(acc + d, _mm256_add_pd(_mm256_loadu_pd(acc + d),
                                              _mm256_mul_pd(w, _mm256_loadu_pd(row + d))));
    }
    for (; d < dim; ++d) acc[d] = acc[d] + weights[i] * row[d];
  }
}

void warp_bilinear_row(const WarpRowArgs& a) {
  const double umax_s = static_cast<double>(a.width - 1);
  const double vmax_s = static_cast<double>(a.height - 1);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d umax = _mm256_set1_pd(umax_s);
  const __m256d vmax = _mm256_set1_pd(vmax_s);
  const __m256d ilast = _mm256_set1_pd(static_cast<double>(a.width - 2));
  const __m256d jlast = _mm256_set1_pd(static_cast<double>(a.height - 2));
  const __m256d stride = _mm256_set1_pd(static_cast<double>(a.width));
  const __m256d u0 = _mm256_set1_pd(a.u0);
  const __m256d v0 = _mm256_set1_pd(a.v0);
  const __m256d du = _mm256_set1_pd(a.du);
  const __m256d dv = _mm256_set1_pd(a.dv);
  const double* img = a.image.data();
  const long long w = static_cast<long long>(a.width);

  const std::size_t n = a.out.size();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const double base_j = static_cast<double>(j);
    const __m256d jd = _mm256_set_pd(base_j + 3.0, base_j + 2.0, base_j + 1.0, base_j);
    const __m256d u = _mm256_add_pd(u0, _mm256_mul_pd(jd, du));
    const __m256d v = _mm256_add_pd(v0, _mm256_mul_pd(jd, dv));
    const __m256d ok = _mm256_and_pd(
        _mm256_and_pd(_mm256_cmp_pd(u, zero, _CMP_GE_OQ), _mm256_cmp_pd(u, umax, _CMP_LE_OQ)),
        _mm256_and_pd(_mm256_cmp_pd(v, zero, _CMP_GE_OQ), _mm256_cmp_pd(v, vmax, _CMP_LE_OQ)));
    const __m256d uc = _mm256_min_pd(umax, _mm256_max_pd(zero, u));
    const __m256d vc = _mm256_min_pd(vmax, _mm256_max_pd(zero, v));
    const __m256d iu = _mm256_min_pd(ilast, _mm256_floor_pd(uc));
    const __m256d iv = _mm256_min_pd(jlast, _mm256_floor_pd(vc));
    const __m256d fx = _mm256_sub_pd(uc, iu);
    const __m256d fy = _mm256_sub_pd(vc, iv);
    const __m128i idx = _mm256_cvtpd_epi32(_mm256_add_pd(_mm256_mul_pd(iv, stride), iu));
    const __m256d i00 = _mm256_i32gather_pd(img, idx, 8);
    const __m256d i10 = _mm256_i32gather_pd(img + 1, idx, 8);
    const __m256d i01 = _mm256_i32gather_pd(img + w, idx, 8);
    const __m256d i11 = _mm256_i32gather_pd(img + w + 1, idx, 8);
    const __m256d gx = _mm256_sub_pd(one, fx);
    const __m256d gy = _mm256_sub_pd(one, fy);
    __m256d s = _mm256_mul_pd(_mm256_mul_pd(gx, gy), i00);
    s = _mm256_add_pd(s, _mm256_mul_pd(_mm256_mul_pd(fx, gy), i10));
    s = _mm256_add_pd(s, _mm256_mul_pd(_mm256_mul_pd(gx, fy), i01));
    s = _mm256_add_pd(s, _mm256_mul_pd(_mm256_mul_pd(fx, fy), i11));
    _mm256_storeu_pd(a.out.data() + j, _mm256_and_pd(ok, s));
    const int bits = _mm256_movemask_pd(ok);
    for (int l = 0; l < 4; ++l) a.valid[j + l] = static_cast<std::uint8_t>((bits >> l) & 1);
  }
  for (; j < n; ++j) detail::bilinear_sample(a, j);
}

}  // namespace kfpso::simd::avx2
