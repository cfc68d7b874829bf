#pragma once

#include <functional>
#include <span>

#include "kfpso/core.hpp"

namespace kfpso {

/// Whether larger raw values are better (similarity) or worse (difference).
enum class Orientation { similarity, difference };

/// A fitness measure together with the orientation that says how to turn it
/// into a non-negative similarity.
///
/// Raw values may be corrupted by zero-mean noise of unknown spread; no noise
/// model is estimated, the normalization below is applied to whatever is
/// measured.
struct FitnessProfile {
  std::function<double(const Vector&)> measure;
  Orientation orientation = Orientation::similarity;

  /// Raw value mapped to the maximization convention used for ranking bests.
  double oriented(double raw) const { return orientation == Orientation::similarity ? raw : -raw; }
};

/// Per-batch normalization to non-negative similarities.
///
/// similarity: v - min(v).
/// difference: exp(-(v - min) / (max - min + tiny)), so outputs span
/// [e^-1, 1] and the smallest difference maps to 1.
/// Throws Error on an empty batch or non-finite values.
Vector normalize_fitness(std::span<const double> values, Orientation orientation);

struct WeightedMean {
  Vector point;
  /// Set when every weight was zero and the plain mean was returned.
  bool degenerate = false;
};

/// sum_i x_i f_i / sum_i f_i over the rows of `positions`. Weights must be
/// non-negative; all-zero weights fall back to the unweighted mean.
WeightedMean weighted_mean_optimum(const PointMatrix& positions, std::span<const double> fitness);

/// Fitness-weighted covariance of the rows of `positions` about `mean`
/// (same fallback as weighted_mean_optimum).
Matrix weighted_covariance(const PointMatrix& positions, std::span<const double> fitness, const Vector& mean);

/// Isotropic Gaussian sigma * exp(-||x - center||^2 / (2 width)) fitted to
/// positive samples by least squares on ln f. Diagnostic only.
struct GaussianFitDiagnostic {
  Vector center;
  double width = 0.0;       // delta-hat squared; beta = 1 / width
  double normalizer = 0.0;  // sigma
  double residual = 0.0;    // RMS residual of ln f
};

/// Requires at least D + 2 distinct positions and strictly positive
/// fitness. Throws Error("non-unimodal sample") if the fitted quadratic is
/// not strictly concave.
GaussianFitDiagnostic fit_gaussian_diagnostic(const PointMatrix& positions, std::span<const double> fitness);

}  // namespace kfpso
