#include "kfpso/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kfpso/simd/kernels.hpp"

namespace kfpso {

Vector normalize_fitness(std::span<const double> values, Orientation orientation) {
  if (values.empty()) throw Error("normalize_fitness: no values");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : values) {
    if (!std::isfinite(v)) throw Error("normalize_fitness: non-finite fitness value");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  Vector out(static_cast<Index>(values.size()));
  if (orientation == Orientation::similarity) {
    for (std::size_t i = 0; i < values.size(); ++i) out[static_cast<Index>(i)] = values[i] - lo;
    return out;
  }
  const double denom = (hi - lo) + std::numeric_limits<double>::min();
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[static_cast<Index>(i)] = std::exp(-((values[i] - lo) / denom));
  }
  return out;
}

namespace {

void check_weights(const PointMatrix& positions, std::span<const double> fitness) {
  if (positions.rows() == 0) throw Error("weighted mean of an empty set");
  if (static_cast<Index>(fitness.size()) != positions.rows()) {
    throw Error("weighted mean: one fitness value per position required");
  }
  for (double f : fitness) {
    if (!(f >= 0.0) || !std::isfinite(f)) throw Error("weighted mean: weights must be finite and >= 0");
  }
}

}  // namespace

WeightedMean weighted_mean_optimum(const PointMatrix& positions, std::span<const double> fitness) {
  check_weights(positions, fitness);
  double total = 0.0;
  for (double f : fitness) total += f;
  WeightedMean result;
  result.point = Vector::Zero(positions.cols());
  std::span<double> out{result.point.data(), static_cast<std::size_t>(result.point.size())};
  if (total > 0.0) {
    simd::weighted_row_sum(as_span(positions), fitness, out);
    result.point /= total;
  } else {
    const std::vector<double> ones(fitness.size(), 1.0);
    simd::weighted_row_sum(as_span(positions), ones, out);
    result.point /= static_cast<double>(positions.rows());
    result.degenerate = true;
  }
  return result;
}

Matrix weighted_covariance(const PointMatrix& positions, std::span<const double> fitness, const Vector& mean) {
  check_weights(positions, fitness);
  double total = 0.0;
  for (double f : fitness) total += f;
  const bool uniform = !(total > 0.0);
  const Index dim = positions.cols();
  Matrix cov = Matrix::Zero(dim, dim);
  for (Index i = 0; i < positions.rows(); ++i) {
    const double w = uniform ? 1.0 : fitness[static_cast<std::size_t>(i)];
    const Vector dx = positions.row(i).transpose() - mean;
    cov.noalias() += w * dx * dx.transpose();
  }
  cov /= uniform ? static_cast<double>(positions.rows()) : total;
  return 0.5 * (cov + cov.transpose());
}

GaussianFitDiagnostic fit_gaussian_diagnostic(const PointMatrix& positions, std::span<const double> fitness) {
  const Index n = positions.rows();
  const Index dim = positions.cols();
  if (static_cast<Index>(fitness.size()) != n) throw Error("gaussian fit: one fitness value per position required");
  for (double f : fitness) {
    if (!(f > 0.0) || !std::isfinite(f)) throw Error("gaussian fit: fitness values must be positive");
  }
  Index distinct = 0;
  for (Index i = 0; i < n; ++i) {
    bool seen = false;
    for (Index j = 0; j < i && !seen; ++j) seen = positions.row(i) == positions.row(j);
    if (!seen) ++distinct;
  }
  if (distinct < dim + 2) throw Error("gaussian fit: need at least D + 2 distinct positions");

  // ln f = a + b.x + q ||x||^2, solved on coordinates centred at the sample
  // centroid for conditioning.
  const Vector centroid = positions.colwise().mean().transpose();
  Matrix design(n, dim + 2);
  Vector target(n);
  double spread = 0.0;
  for (Index i = 0; i < n; ++i) {
    const Vector x = positions.row(i).transpose() - centroid;
    design(i, 0) = 1.0;
    design.block(i, 1, 1, dim) = x.transpose();
    design(i, dim + 1) = x.squaredNorm();
    target[i] = std::log(fitness[static_cast<std::size_t>(i)]);
    spread += x.squaredNorm();
  }
  spread /= static_cast<double>(n);
  const Vector coef = design.colPivHouseholderQr().solve(target);
  const double q = coef[dim + 1];
  if (!std::isfinite(q) || !(q * spread < -1e-10)) throw Error("non-unimodal sample");

  GaussianFitDiagnostic fit;
  const Vector b = coef.segment(1, dim);
  const Vector local_center = -b / (2.0 * q);
  fit.center = local_center + centroid;
  fit.width = -1.0 / (2.0 * q);
  fit.normalizer = std::exp(coef[0] + local_center.squaredNorm() / (2.0 * fit.width));
  fit.residual = std::sqrt((design * coef - target).squaredNorm() / static_cast<double>(n));
  return fit;
}

}  // namespace kfpso
