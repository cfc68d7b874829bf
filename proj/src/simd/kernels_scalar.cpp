#include "kfpso/simd/kernels.hpp"

#include <algorithm>

#include "bilinear_sample.hpp"

namespace kfpso::simd::scalar {

void swarm_step(const SwarmStepArgs& a) {
  const std::size_t dim = a.lower.size();
  for (std::size_t k = 0; k < a.positions.size(); ++k) detail::swarm_step_element(a, k, k % dim);
}

void weighted_row_sum(std::span<const double> points, std::span<const double> weights,
                      std::span<double> out) {
  const std::size_t dim = out.size();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double w = weights[i];
    const double* row = points.data() + i * dim;
    for (std::size_t d = 0; d < dim; ++d) out[d] = out[d] + w * row[d];
  }
}

void warp_bilinear_row(const WarpRowArgs& a) {
  for (std::size_t j = 0; j < a.out.size(); ++j) detail::bilinear_sample(a, j);
}

}  // namespace kfpso::simd::scalar
