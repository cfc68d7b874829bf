#include "kfpso/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kfpso/simd/kernels.hpp"

namespace kfpso {

std::string_view mode_name(Mode mode) {
  switch (mode) {
    case Mode::original:
      return "original";
    case Mode::lds_kf:
      return "lds-kf";
    case Mode::spo_ukf:
      return "spo-ukf";
    case Mode::nested_ukf:
      return "nested-ukf";
  }
  return "unknown";
}

Mode parse_mode(std::string_view name) {
  for (Mode m : {Mode::original, Mode::lds_kf, Mode::spo_ukf, Mode::nested_ukf}) {
    if (mode_name(m) == name) return m;
  }
  throw Error("unknown method '" + std::string(name) + "' (expected original, lds-kf, spo-ukf or nested-ukf)");
}

bool is_guided(Mode mode) { return mode != Mode::original; }

PsoConfig PsoConfig::defaults(Mode mode) {
  PsoConfig cfg;
  cfg.mode = mode;
  cfg.c_global = is_guided(mode) ? 1.0 : 2.0;
  cfg.c_theta = is_guided(mode) ? 1.0 : 0.0;
  return cfg;
}

void PsoConfig::validate() const {
  if (!(inertia >= 0.0 && inertia <= 1.0)) throw Error("inertia must lie in [0, 1]");
  if (inertia_final && !(*inertia_final >= 0.0 && *inertia_final <= 1.0)) {
    throw Error("final inertia must lie in [0, 1]");
  }
  if (!(c_personal >= 0.0 && c_global >= 0.0 && c_theta >= 0.0)) throw Error("acceleration constants must be >= 0");
  if (swarm_size < 2) throw Error("swarm too small: need at least 2 particles");
  if (max_iterations == 0) throw Error("max_iterations must be positive");
  if (!(process_noise_fraction >= 0.0)) throw Error("process noise fraction must be >= 0");
}

double PsoConfig::inertia_at(std::size_t iteration) const {
  if (!inertia_final || max_iterations < 2) return inertia;
  const double t = std::min(1.0, static_cast<double>(iteration > 0 ? iteration - 1 : 0) / static_cast<double>(max_iterations - 2));
  return inertia + (*inertia_final - inertia) * t;
}

GaussianBelief initial_belief(const SearchSpace& space) {
  const Vector half = 0.5 * space.width();
  return GaussianBelief{space.center(), half.cwiseProduct(half).asDiagonal()};
}

Matrix default_process_noise(const SearchSpace& space, double fraction) {
  const Vector sd = fraction * space.width();
  return sd.cwiseProduct(sd).asDiagonal();
}

StepDraws StepDraws::draw(Index k, Index dim, RngStream& rng) {
  StepDraws d;
  d.r_personal.resize(k, dim);
  d.r_global.resize(k, dim);
  d.r_theta.resize(k, dim);
  rng.fill_uniform(as_span(d.r_personal));
  rng.fill_uniform(as_span(d.r_global));
  rng.fill_uniform(as_span(d.r_theta));
  return d;
}

void apply_step(Swarm& swarm, const StepCoefficients& c, const Vector& theta, const StepDraws& draws,
                const SearchSpace& space) {
  const Index k = swarm.size();
  const Index dim = swarm.dim();
  if (space.dim() != dim || theta.size() != dim || swarm.global_best.size() != dim) {
    throw Error("apply_step: dimension mismatch");
  }
  if (draws.r_personal.rows() != k || draws.r_personal.cols() != dim || draws.r_global.size() != k * dim ||
      draws.r_theta.size() != k * dim) {
    throw Error("apply_step: draw blocks must be K x D");
  }
  simd::SwarmStepArgs args;
  args.positions = as_span(swarm.positions);
  args.velocities = as_span(swarm.velocities);
  args.personal_best = as_span(swarm.personal_best);
  args.global_best = as_span(swarm.global_best);
  args.theta = as_span(theta);
  args.r_personal = as_span(draws.r_personal);
  args.r_global = as_span(draws.r_global);
  args.r_theta = as_span(draws.r_theta);
  args.lower = as_span(space.lower());
  args.upper = as_span(space.upper());
  args.inertia = c.inertia;
  args.c_personal = c.c_personal;
  args.c_global = c.c_global;
  args.c_theta = c.c_theta;
  simd::swarm_step(args);
}

void step_original(OptimizerState& state, const PsoConfig& config, const SearchSpace& space, RngStream& rng) {
  const StepDraws draws = StepDraws::draw(state.swarm.size(), state.swarm.dim(), rng);
  apply_step(state.swarm, {config.inertia_at(state.swarm.iteration), config.c_personal, config.c_global, 0.0}, state.swarm.global_best, draws,
             space);
}

void step_guided(OptimizerState& state, const PsoConfig& config, const SearchSpace& space, RngStream& rng) {
  const StepDraws draws = StepDraws::draw(state.swarm.size(), state.swarm.dim(), rng);
  apply_step(state.swarm, {config.inertia_at(state.swarm.iteration), config.c_personal, state.c_global, state.c_theta}, state.belief.mean,
             draws, space);
}

std::pair<double, double> adapt_accelerations(const Vector& global_best, const Vector& previous_global_best) {
  const double c_global = std::min((global_best - previous_global_best).norm(), 1.2);
  return {c_global, 2.0 - c_global};
}

StopReason check_stop(const OptimizerState& state, const PsoConfig& config) {
  if (state.swarm.iteration >= config.max_iterations) return StopReason::max_iterations;
  if (state.swarm.spread_around_global_best() < config.variability_tol) return StopReason::converged_positions;
  if (is_guided(config.mode) && state.belief.covariance.size() > 0 &&
      state.belief.covariance.trace() < config.variability_tol) {
    return StopReason::converged_covariance;
  }
  return StopReason::none;
}

namespace {

Vector evaluate(const FitnessProfile& profile, const PointMatrix& points) {
  Vector raw(points.rows());
  for (Index i = 0; i < points.rows(); ++i) {
    raw[i] = profile.measure(points.row(i).transpose());
    if (!std::isfinite(raw[i])) throw Error("fitness measure returned a non-finite value");
  }
  return raw;
}

Vector oriented(const FitnessProfile& profile, const Vector& raw) {
  return profile.orientation == Orientation::similarity ? raw : Vector(-raw);
}

struct Observation {
  Vector point;
  Matrix noise;
};

Observation observe(const PointMatrix& points, const Vector& raw, const FitnessProfile& profile,
                    const std::optional<Matrix>& noise_override) {
  const Vector weights = normalize_fitness(as_span(raw), profile.orientation);
  Observation obs;
  obs.point = weighted_mean_optimum(points, as_span(weights)).point;
  obs.noise = noise_override ? *noise_override : weighted_covariance(points, as_span(weights), obs.point);
  return obs;
}

// Unweighted centroid of the particle cloud.
Vector cloud_center(const PointMatrix& points) { return points.colwise().mean().transpose(); }

PointMatrix translate_clamped(const PointMatrix& points, const Vector& shift, const SearchSpace& space) {
  PointMatrix out(points.rows(), points.cols());
  for (Index i = 0; i < points.rows(); ++i) {
    out.row(i) = clamp_to_bounds(points.row(i).transpose() + shift, space).transpose();
  }
  return out;
}

RunResult run_loop(const Problem& problem, const PsoConfig& config, const Swarm& initial, RngStream& rng) {
  config.validate();
  const SearchSpace& space = problem.space;
  const Index dim = space.dim();
  if (initial.dim() != dim) throw Error("initial swarm dimension does not match the search space");
  if (initial.size() < 2) throw Error("swarm too small: need at least 2 particles");
  if (config.mode == Mode::nested_ukf && !problem.secondary) {
    throw Error("nested-ukf needs a secondary fitness profile");
  }
  const bool guided = is_guided(config.mode);
  const Matrix identity = Matrix::Identity(dim, dim);
  const Matrix process_noise = default_process_noise(space, config.process_noise_fraction);

  OptimizerState state;
  state.swarm = initial;
  state.swarm.iteration = 0;
  state.belief = initial_belief(space);
  state.c_global = config.c_global;
  state.c_theta = config.c_theta;

  Vector previous_global_best;
  // Previous-iteration inputs of the particle-motion transition.
  PointMatrix motion_positions;
  Vector motion_weights;
  Vector motion_theta;

  RunResult result;
  for (;;) {
    const Index k = state.swarm.size();
    const Vector raw = evaluate(problem.primary, state.swarm.positions);
    state.eval_count += static_cast<std::size_t>(k);
    state.swarm.update_bests(oriented(problem.primary, raw));

    if (guided) {
      if (state.swarm.iteration >= 1) {
        std::tie(state.c_global, state.c_theta) = adapt_accelerations(state.swarm.global_best, previous_global_best);
      }
      previous_global_best = state.swarm.global_best;

      switch (config.mode) {
        case Mode::lds_kf: {
          const Observation obs = observe(state.swarm.positions, raw, problem.primary, config.observation_noise);
          const GaussianBelief predicted = kf_time_update(state.belief, identity, process_noise);
          state.belief = kf_measurement_update(predicted, obs.point, identity, obs.noise);
          break;
        }
        case Mode::spo_ukf: {
          const Vector weights = normalize_fitness(as_span(raw), problem.primary.orientation);
          const Vector estimate = weighted_mean_optimum(state.swarm.positions, as_span(weights)).point;
          const PointMatrix shifted =
              translate_clamped(state.swarm.positions, estimate - cloud_center(state.swarm.positions), space);
          const Vector shifted_raw = evaluate(problem.primary, shifted);
          state.eval_count += static_cast<std::size_t>(k);
          const Observation obs = observe(shifted, shifted_raw, problem.primary, config.observation_noise);

          GaussianBelief predicted;
          if (config.spo_transition == SpoTransition::particle_motion && motion_positions.size() > 0) {
            SigmaSet moved = sigma_points_from_particles(motion_positions, as_span(motion_weights), motion_theta);
            Vector drift = Vector::Zero(dim);
            double particle_mass = 0.0;
            for (Index i = 0; i < k; ++i) {
              const double w = moved.weights[static_cast<std::size_t>(i)];
              drift += w * (state.swarm.positions.row(i) - motion_positions.row(i)).transpose();
              particle_mass += w;
            }
            moved.points.topRows(k) = state.swarm.positions;
            moved.points.row(k) = (motion_theta + drift / particle_mass).transpose();
            predicted = ut_moments(moved, process_noise);
          } else {
            const SigmaSet sigma = sigma_points_standard(state.belief, default_kappa(dim));
            predicted = ut_propagate(sigma, [](const Vector& x) { return x; }, process_noise);
          }
          state.belief = kf_measurement_update(predicted, obs.point, identity, obs.noise);
          motion_positions = state.swarm.positions;
          motion_weights = weights;
          motion_theta = state.belief.mean;
          break;
        }
        case Mode::nested_ukf: {
          const Vector raw2 = evaluate(*problem.secondary, state.swarm.positions);
          state.secondary_eval_count += static_cast<std::size_t>(k);
          const Observation obs1 = observe(state.swarm.positions, raw, problem.primary, config.observation_noise);
          const Observation obs2 =
              observe(state.swarm.positions, raw2, *problem.secondary, config.secondary_observation_noise);
          const GaussianBelief predicted = kf_time_update(state.belief, identity, process_noise);
          const GaussianBelief first = kf_measurement_update(predicted, obs1.point, identity, obs1.noise);
          // The first posterior is the second filter's prediction, with no
          // extra process noise.
          state.belief = kf_measurement_update(first, obs2.point, identity, obs2.noise);
          break;
        }
        case Mode::original:
          break;
      }
    }

    state.history.push_back({state.swarm.global_best, state.belief.mean});
    ++state.swarm.iteration;
    result.stop = check_stop(state, config);
    if (result.stop != StopReason::none) break;
    if (guided) {
      step_guided(state, config, space, rng);
    } else {
      step_original(state, config, space, rng);
    }
  }

  result.iterations = state.swarm.iteration;
  result.evaluations = state.eval_count;
  result.returned_point = state.swarm.global_best;
  if (guided) {
    // Read-out comparison; not counted as a search evaluation.
    const Vector theta = clamp_to_bounds(state.belief.mean, space);
    const double theta_fitness = problem.primary.oriented(problem.primary.measure(theta));
    if (theta_fitness >= state.swarm.global_best_fitness) result.returned_point = theta;
  }
  result.final_state = std::move(state);
  return result;
}

RunResult run_mode(Mode mode, const Problem& problem, const PsoConfig& config, const Swarm& initial, RngStream& rng) {
  if (config.mode != mode) {
    throw Error("optimizer called with config mode '" + std::string(mode_name(config.mode)) + "', expected '" +
                std::string(mode_name(mode)) + "'");
  }
  return run_loop(problem, config, initial, rng);
}

}  // namespace

RunResult run_original_pso(const Problem& problem, const PsoConfig& config, const Swarm& initial, RngStream& rng) {
  return run_mode(Mode::original, problem, config, initial, rng);
}

RunResult run_lds_kfpso(const Problem& problem, const PsoConfig& config, const Swarm& initial, RngStream& rng) {
  return run_mode(Mode::lds_kf, problem, config, initial, rng);
}

RunResult run_spo_ukfpso(const Problem& problem, const PsoConfig& config, const Swarm& initial, RngStream& rng) {
  return run_mode(Mode::spo_ukf, problem, config, initial, rng);
}

RunResult run_nested_ukfpso(const Problem& problem, const PsoConfig& config, const Swarm& initial, RngStream& rng) {
  return run_mode(Mode::nested_ukf, problem, config, initial, rng);
}

RunResult run_optimizer(const Problem& problem, const PsoConfig& config, const Swarm& initial, RngStream& rng) {
  return run_loop(problem, config, initial, rng);
}

}  // namespace kfpso
