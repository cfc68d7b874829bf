#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "kfpso/core.hpp"

namespace kfpso {

/// Gaussian belief N(mean, covariance) over the location of the optimum.
struct GaussianBelief {
  Vector mean;
  Matrix covariance;

  Index dim() const { return mean.size(); }
};

/// Process noise for the time update and the observation noise for the
/// measurement update. An unset observation covariance means "use the
/// fitness-weighted spread of the particles that produced the observation".
struct NoiseConfig {
  Matrix process;
  std::optional<Matrix> observation;

  static NoiseConfig isotropic(Index dim, double process_variance, std::optional<double> observation_variance = {});
};

/// Symmetrizes and, when needed, clamps negative eigenvalues to zero.
/// Throws Error if an eigenvalue is below -tolerance * max(1, trace).
Matrix make_psd(const Matrix& m, double tolerance = 1e-10);

/// Symmetric square root via eigendecomposition; works for singular PSD input.
Matrix symmetric_sqrt(const Matrix& psd);

/// Prediction: mean = F mean, covariance = F Sigma F^T + process.
GaussianBelief kf_time_update(const GaussianBelief& belief, const Matrix& transition, const Matrix& process_noise);

/// Correction with observation xi = H theta + noise:
/// K = S^- H^T (H S^- H^T + R)^-1, mean += K (xi - H mean), S = (I - K H) S^-.
/// Throws Error (with the condition number) if the innovation covariance is
/// singular.
GaussianBelief kf_measurement_update(const GaussianBelief& predicted, const Vector& observation,
                                     const Matrix& observation_matrix, const Matrix& observation_noise);

/// Weighted point set representing a Gaussian.
struct SigmaSet {
  PointMatrix points;
  std::vector<double> weights;
  double kappa = 0.0;
  /// True for the 2D+1 construction from a belief; false for particle sets.
  bool standard = false;
};

/// kappa + D = 3.
inline double default_kappa(Index dim) { return 3.0 - static_cast<double>(dim); }

/// 2D+1 points: the mean, then mean +/- the columns of sqrt((D + kappa) Sigma).
/// Weights kappa/(D+kappa) for the centre and 1/(2(D+kappa)) for each wing.
SigmaSet sigma_points_standard(const GaussianBelief& belief, double kappa);

/// Particle positions followed by the prior mean. Weights are the
/// normalized fitness values; the prior mean gets the mean particle weight
/// and the whole set is renormalized to sum to one. Zero total fitness
/// falls back to uniform weights.
SigmaSet sigma_points_from_particles(const PointMatrix& positions, std::span<const double> fitness,
                                     const Vector& prior_mean);

using Transition = std::function<Vector(const Vector&)>;

/// Moments of an already propagated sigma set plus process noise.
///
/// With a negative centre weight (kappa < 0, i.e. D > 3) the weighted
/// covariance can lose positive semi-definiteness. If that happens the
/// covariance is rebuilt without the centre term (kappa clamped to zero for
/// the covariance only); the mean always keeps the original weights.
GaussianBelief ut_moments(const SigmaSet& propagated, const Matrix& process_noise);

/// Unscented prediction: every point goes through `transition`, then
/// ut_moments. Throws Error if the transition returns a non-finite vector.
GaussianBelief ut_propagate(const SigmaSet& sigma, const Transition& transition, const Matrix& process_noise);

}  // namespace kfpso
