#include "kfpso/core.hpp"

#include <cmath>

namespace kfpso {

SearchSpace::SearchSpace(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() == 0) throw Error("search space must have at least one dimension");
  if (lower_.size() != upper_.size()) throw Error("search space bounds have different lengths");
  for (Index d = 0; d < lower_.size(); ++d) {
    if (!std::isfinite(lower_[d]) || !std::isfinite(upper_[d]) || !(lower_[d] < upper_[d])) {
      throw Error("degenerate search space bounds on axis " + std::to_string(d));
    }
  }
}

SearchSpace SearchSpace::cube(Index dim, double lower, double upper) {
  return SearchSpace(Vector::Constant(dim, lower), Vector::Constant(dim, upper));
}

bool SearchSpace::contains(const Vector& x) const {
  return x.size() == dim() && (x.array() >= lower_.array()).all() && (x.array() <= upper_.array()).all();
}

bool SearchSpace::strictly_contains(const Vector& x) const {
  return x.size() == dim() && (x.array() > lower_.array()).all() && (x.array() < upper_.array()).all();
}

Vector clamp_to_bounds(const Vector& x, const SearchSpace& space) {
  if (x.size() != space.dim()) throw Error("clamp_to_bounds: dimension mismatch");
  return x.cwiseMax(space.lower()).cwiseMin(space.upper());
}

Particle Swarm::particle(Index i) const {
  return Particle{positions.row(i).transpose(), velocities.row(i).transpose(),
                  personal_best.row(i).transpose(), personal_best_fitness[i]};
}

void Swarm::update_bests(const Vector& fitness) {
  if (fitness.size() != size()) throw Error("update_bests: one fitness value per particle required");
  for (Index i = 0; i < size(); ++i) {
    if (fitness[i] > personal_best_fitness[i]) {
      personal_best_fitness[i] = fitness[i];
      personal_best.row(i) = positions.row(i);
    }
  }
  for (Index i = 0; i < size(); ++i) {
    if (personal_best_fitness[i] > global_best_fitness) {
      global_best_fitness = personal_best_fitness[i];
      global_best = personal_best.row(i).transpose();
    }
  }
}

double Swarm::spread_around_global_best() const {
  double worst = 0.0;
  for (Index i = 0; i < size(); ++i) {
    worst = std::max(worst, (positions.row(i).transpose() - global_best).norm());
  }
  return worst;
}

Swarm init_swarm(const SearchSpace& space, Index k, RngStream& rng) {
  if (k < 2) throw Error("swarm too small: need at least 2 particles, got " + std::to_string(k));
  const Index dim = space.dim();
  Swarm swarm;
  swarm.positions.resize(k, dim);
  swarm.velocities.resize(k, dim);
  const Vector width = space.width();
  for (Index i = 0; i < k; ++i) {
    for (Index d = 0; d < dim; ++d) {
      swarm.positions(i, d) = rng.uniform(space.lower()[d], space.upper()[d]);
    }
  }
  for (Index i = 0; i < k; ++i) {
    for (Index d = 0; d < dim; ++d) {
      swarm.velocities(i, d) = rng.uniform(-0.5 * width[d], 0.5 * width[d]);
    }
  }
  swarm.personal_best = swarm.positions;
  swarm.personal_best_fitness = Vector::Constant(k, -std::numeric_limits<double>::infinity());
  swarm.global_best = swarm.positions.row(0).transpose();
  swarm.global_best_fitness = -std::numeric_limits<double>::infinity();
  swarm.iteration = 0;
  return swarm;
}

}  // namespace kfpso
