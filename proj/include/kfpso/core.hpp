#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

#include "kfpso/rng.hpp"

namespace kfpso {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// K x D block of particle coordinates, one particle per row, stored
/// contiguously so rows can be handed to the vector kernels.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Error raised for violated preconditions and numerical failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}
inline std::span<const double> as_span(const PointMatrix& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
inline std::span<double> as_span(PointMatrix& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

/// Axis-aligned box of admissible solutions.
class SearchSpace {
 public:
  SearchSpace(Vector lower, Vector upper);

  /// The same interval on every axis.
  static SearchSpace cube(Index dim, double lower, double upper);

  Index dim() const { return lower_.size(); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  Vector center() const { return 0.5 * (lower_ + upper_); }
  Vector width() const { return upper_ - lower_; }

  bool contains(const Vector& x) const;
  bool strictly_contains(const Vector& x) const;

 private:
  Vector lower_;
  Vector upper_;
};

Vector clamp_to_bounds(const Vector& x, const SearchSpace& space);

/// Copy of one particle's state.
struct Particle {
  Vector position;
  Vector velocity;
  Vector personal_best;
  double personal_best_fitness = -std::numeric_limits<double>::infinity();
};

/// Particle population plus the best position measured so far.
///
/// Fitness values stored here use the maximization convention: larger is
/// better. Minimization problems are negated before they reach the swarm.
struct Swarm {
  PointMatrix positions;
  PointMatrix velocities;
  PointMatrix personal_best;
  Vector personal_best_fitness;
  Vector global_best;
  double global_best_fitness = -std::numeric_limits<double>::infinity();
  std::size_t iteration = 0;

  Index size() const { return positions.rows(); }
  Index dim() const { return positions.cols(); }
  Particle particle(Index i) const;

  /// Folds fitness values measured at the current positions into the
  /// personal and global bests. Only strict improvements replace a best, so
  /// both best fitness values are non-decreasing.
  void update_bests(const Vector& fitness);

  /// max_i ||x_i - x^g||.
  double spread_around_global_best() const;
};

/// Uniform positions inside the box, velocities uniform in
/// [-(upper-lower)/2, +(upper-lower)/2] per axis, personal bests at the
/// initial positions, t = 0. Bests are unset until the first evaluation.
Swarm init_swarm(const SearchSpace& space, Index k, RngStream& rng);

}  // namespace kfpso
