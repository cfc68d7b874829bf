#include "kfpso/kalman.hpp"

#include <cmath>
#include <sstream>

namespace kfpso {

namespace {

void require_square(const Matrix& m, Index dim, const char* what) {
  if (m.rows() != dim || m.cols() != dim) {
    std::ostringstream os;
    os << what << ": expected " << dim << "x" << dim << ", got " << m.rows() << "x" << m.cols();
    throw Error(os.str());
  }
}

double condition_number(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

}  // namespace

NoiseConfig NoiseConfig::isotropic(Index dim, double process_variance, std::optional<double> observation_variance) {
  NoiseConfig cfg;
  cfg.process = process_variance * Matrix::Identity(dim, dim);
  if (observation_variance) cfg.observation = *observation_variance * Matrix::Identity(dim, dim);
  return cfg;
}

Matrix make_psd(const Matrix& m, double tolerance) {
  if (m.rows() != m.cols()) throw Error("make_psd: matrix is not square");
  Matrix sym = 0.5 * (m + m.transpose());
  if (!sym.allFinite()) throw Error("make_psd: non-finite covariance");
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() == Eigen::Success) return sym;

  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  const Vector& ev = es.eigenvalues();
  const double scale = std::max(1.0, std::abs(sym.trace()));
  if (ev.minCoeff() < -tolerance * scale) {
    std::ostringstream os;
    os << "covariance is not positive semi-definite (min eigenvalue " << ev.minCoeff() << ")";
    throw Error(os.str());
  }
  if (ev.minCoeff() >= 0.0) return sym;
  const Matrix& vecs = es.eigenvectors();
  Matrix out = vecs * ev.cwiseMax(0.0).asDiagonal() * vecs.transpose();
  return 0.5 * (out + out.transpose());
}

Matrix symmetric_sqrt(const Matrix& psd) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (psd + psd.transpose()));
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

GaussianBelief kf_time_update(const GaussianBelief& belief, const Matrix& transition, const Matrix& process_noise) {
  const Index dim = belief.dim();
  require_square(belief.covariance, dim, "kf_time_update covariance");
  require_square(transition, dim, "kf_time_update transition");
  require_square(process_noise, dim, "kf_time_update process noise");
  GaussianBelief out;
  out.mean = transition * belief.mean;
  out.covariance = make_psd(transition * belief.covariance * transition.transpose() + process_noise);
  return out;
}

GaussianBelief kf_measurement_update(const GaussianBelief& predicted, const Vector& observation,
                                     const Matrix& observation_matrix, const Matrix& observation_noise) {
  const Index dim = predicted.dim();
  require_square(predicted.covariance, dim, "kf_measurement_update covariance");
  require_square(observation_matrix, dim, "kf_measurement_update observation matrix");
  require_square(observation_noise, dim, "kf_measurement_update observation noise");
  if (observation.size() != dim) throw Error("kf_measurement_update: observation has wrong dimension");

  const Matrix& p = predicted.covariance;
  const Matrix& h = observation_matrix;
  Matrix innovation = h * p * h.transpose() + observation_noise;
  innovation = 0.5 * (innovation + innovation.transpose());
  Eigen::LLT<Matrix> llt(innovation);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-15)) {
    std::ostringstream os;
    os << "singular innovation covariance (condition number " << condition_number(innovation) << ")";
    throw Error(os.str());
  }
  // K = P H^T S^-1, computed as (S^-1 H P)^T since S and P are symmetric.
  const Matrix gain = llt.solve(h * p).transpose();
  GaussianBelief out;
  out.mean = predicted.mean + gain * (observation - h * predicted.mean);
  out.covariance = make_psd((Matrix::Identity(dim, dim) - gain * h) * p);
  return out;
}

SigmaSet sigma_points_standard(const GaussianBelief& belief, double kappa) {
  const Index dim = belief.dim();
  require_square(belief.covariance, dim, "sigma_points_standard covariance");
  const double spread = static_cast<double>(dim) + kappa;
  if (!(spread > 0.0)) throw Error("sigma_points_standard: D + kappa must be positive");
  const Matrix root = symmetric_sqrt(make_psd(spread * belief.covariance));
  if (!root.allFinite()) throw Error("sigma_points_standard: covariance is not factorizable");

  SigmaSet set;
  set.kappa = kappa;
  set.standard = true;
  set.points.resize(2 * dim + 1, dim);
  set.points.row(0) = belief.mean.transpose();
  for (Index j = 0; j < dim; ++j) {
    set.points.row(1 + j) = (belief.mean + root.col(j)).transpose();
    set.points.row(1 + dim + j) = (belief.mean - root.col(j)).transpose();
  }
  set.weights.assign(static_cast<std::size_t>(2 * dim + 1), 1.0 / (2.0 * spread));
  set.weights[0] = kappa / spread;
  return set;
}

SigmaSet sigma_points_from_particles(const PointMatrix& positions, std::span<const double> fitness,
                                     const Vector& prior_mean) {
  const Index k = positions.rows();
  if (static_cast<Index>(fitness.size()) != k) throw Error("sigma_points_from_particles: fitness size mismatch");
  if (prior_mean.size() != positions.cols()) throw Error("sigma_points_from_particles: prior mean dimension");
  double total = 0.0;
  for (double f : fitness) {
    if (!(f >= 0.0) || !std::isfinite(f)) throw Error("sigma_points_from_particles: weights must be >= 0");
    total += f;
  }
  SigmaSet set;
  set.points.resize(k + 1, positions.cols());
  set.points.topRows(k) = positions;
  set.points.row(k) = prior_mean.transpose();
  set.weights.resize(static_cast<std::size_t>(k + 1));
  for (Index i = 0; i < k; ++i) {
    set.weights[static_cast<std::size_t>(i)] = total > 0.0 ? fitness[static_cast<std::size_t>(i)] / total
                                                           : 1.0 / static_cast<double>(k);
  }
  // Prior mean gets the mean particle weight (1/K), then renormalize.
  set.weights[static_cast<std::size_t>(k)] = 1.0 / static_cast<double>(k);
  const double sum = 1.0 + 1.0 / static_cast<double>(k);
  for (double& w : set.weights) w /= sum;
  return set;
}

GaussianBelief ut_moments(const SigmaSet& propagated, const Matrix& process_noise) {
  const Index n = propagated.points.rows();
  const Index dim = propagated.points.cols();
  if (static_cast<Index>(propagated.weights.size()) != n) throw Error("ut_moments: weight count mismatch");
  require_square(process_noise, dim, "ut_moments process noise");

  Vector mean = Vector::Zero(dim);
  for (Index j = 0; j < n; ++j) mean += propagated.weights[static_cast<std::size_t>(j)] * propagated.points.row(j).transpose();

  auto covariance_from = [&](Index first) {
    Matrix cov = Matrix::Zero(dim, dim);
    for (Index j = first; j < n; ++j) {
      const Vector dx = propagated.points.row(j).transpose() - mean;
      cov.noalias() += propagated.weights[static_cast<std::size_t>(j)] * dx * dx.transpose();
    }
    return cov;
  };

  GaussianBelief out;
  out.mean = mean;
  Matrix cov = covariance_from(0) + process_noise;
  try {
    out.covariance = make_psd(cov);
  } catch (const Error&) {
    if (!propagated.standard || propagated.weights[0] >= 0.0) throw;
    out.covariance = make_psd(covariance_from(1) + process_noise);
  }
  return out;
}

GaussianBelief ut_propagate(const SigmaSet& sigma, const Transition& transition, const Matrix& process_noise) {
  SigmaSet moved = sigma;
  for (Index j = 0; j < sigma.points.rows(); ++j) {
    const Vector y = transition(sigma.points.row(j).transpose());
    if (y.size() != sigma.points.cols() || !y.allFinite()) {
      throw Error("ut_propagate: transition returned a non-finite or mis-sized vector");
    }
    moved.points.row(j) = y.transpose();
  }
  return ut_moments(moved, process_noise);
}

}  // namespace kfpso
