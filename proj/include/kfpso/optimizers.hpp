#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kfpso/core.hpp"
#include "kfpso/estimator.hpp"
#include "kfpso/kalman.hpp"

namespace kfpso {

enum class Mode { original, lds_kf, spo_ukf, nested_ukf };

/// How SPO-UKFPSO predicts the hidden optimum between iterations.
///   identity        standard sigma set from the belief through the identity map
///   particle_motion particles plus the prior mean, carried by this
///                   iteration's particle displacements
enum class SpoTransition { identity, particle_motion };

/// CLI spelling: original, lds-kf, spo-ukf, nested-ukf.
std::string_view mode_name(Mode mode);
Mode parse_mode(std::string_view name);
bool is_guided(Mode mode);

struct PsoConfig {
  Mode mode = Mode::original;
  SpoTransition spo_transition = SpoTransition::identity;
  /// Inertia falls linearly from `inertia` at the first step to
  /// `inertia_final` at the last permitted step; unset keeps it constant.
  double inertia = 0.9;
  std::optional<double> inertia_final = 0.4;
  double c_personal = 2.0;
  /// Starting social weight. Original PSO keeps it fixed; the guided modes
  /// adapt it every iteration.
  double c_global = 2.0;
  double c_theta = 1.0;
  Index swarm_size = 30;
  std::size_t max_iterations = 300;
  double variability_tol = 1e-6;
  /// Process noise standard deviation as a fraction of each axis' width.
  double process_noise_fraction = 0.01;
  /// Observation noise override; unset means fitness-weighted particle spread.
  std::optional<Matrix> observation_noise;
  /// Observation noise override for the second filter of nested mode.
  std::optional<Matrix> secondary_observation_noise;

  /// Defaults for a mode: c_g = 2 for original PSO, c_g = c_theta = 1 for the
  /// guided variants.
  static PsoConfig defaults(Mode mode);
  void validate() const;
  /// Inertia used for the step taken after `iteration` evaluations.
  double inertia_at(std::size_t iteration) const;
};

/// Objective to maximize under a fitness profile, over a box. Nested mode
/// also needs a secondary profile over the same box.
struct Problem {
  SearchSpace space;
  FitnessProfile primary;
  std::optional<FitnessProfile> secondary;
};

struct IterationRecord {
  Vector global_best;
  Vector theta;
};

struct OptimizerState {
  Swarm swarm;
  GaussianBelief belief;
  double c_global = 1.0;
  double c_theta = 1.0;
  /// Evaluations of the primary measure (including SPO re-evaluations).
  std::size_t eval_count = 0;
  /// Evaluations of the secondary measure (nested mode only).
  std::size_t secondary_eval_count = 0;
  std::vector<IterationRecord> history;
};

enum class StopReason { none, max_iterations, converged_positions, converged_covariance };

struct RunResult {
  Vector returned_point;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  StopReason stop = StopReason::none;
  OptimizerState final_state;
};

/// Uniform-box moments: mean at the centre, covariance diag(((upper-lower)/2)^2).
GaussianBelief initial_belief(const SearchSpace& space);

/// Per-axis process covariance diag((fraction * width)^2).
Matrix default_process_noise(const SearchSpace& space, double fraction);

/// Uniform draws for one swarm step, one K x D block per coefficient.
struct StepDraws {
  PointMatrix r_personal;
  PointMatrix r_global;
  PointMatrix r_theta;

  /// Draws r_p, then r_g, then r_theta, each row-major.
  static StepDraws draw(Index k, Index dim, RngStream& rng);
};

struct StepCoefficients {
  double inertia = 0.0;
  double c_personal = 0.0;
  double c_global = 0.0;
  double c_theta = 0.0;
};

/// Velocity and clamped position update for every particle with explicit
/// draws. Personal and global bests are left untouched.
void apply_step(Swarm& swarm, const StepCoefficients& coefficients, const Vector& theta, const StepDraws& draws,
                const SearchSpace& space);

/// Draws r_p, r_g, r_theta for every particle and axis (in that order, one
/// K x D block each) and applies
///   v <- w v + c_p r_p (x^p - x) + c_g r_g (x^g - x) [+ c_theta r_theta (theta - x)]
///   x <- clamp(x + v); v <- 0 on every axis where the clamp moved x.
/// Both steppers consume the same draws, so with c_theta = 0 they agree
/// bit for bit.
void step_original(OptimizerState& state, const PsoConfig& config, const SearchSpace& space, RngStream& rng);
void step_guided(OptimizerState& state, const PsoConfig& config, const SearchSpace& space, RngStream& rng);

/// c_g = min(||x^g(t) - x^g(t-1)||, 1.2), c_theta = 2 - c_g.
std::pair<double, double> adapt_accelerations(const Vector& global_best, const Vector& previous_global_best);

StopReason check_stop(const OptimizerState& state, const PsoConfig& config);

/// Optimizers. Every run starts from `initial` (unevaluated), so several
/// modes can share one initialization.
RunResult run_original_pso(const Problem& problem, const PsoConfig& config, const Swarm& initial, RngStream& rng);
RunResult run_lds_kfpso(const Problem& problem, const PsoConfig& config, const Swarm& initial, RngStream& rng);
RunResult run_spo_ukfpso(const Problem& problem, const PsoConfig& config, const Swarm& initial, RngStream& rng);
RunResult run_nested_ukfpso(const Problem& problem, const PsoConfig& config, const Swarm& initial, RngStream& rng);

/// Dispatches on config.mode.
RunResult run_optimizer(const Problem& problem, const PsoConfig& config, const Swarm& initial, RngStream& rng);

/// One optimizer run as reported by the harness.
struct TrialRecord {
  Vector returned_point;
  double error = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  double wall_seconds = 0.0;
  Mode mode = Mode::original;
  std::uint64_t seed = 0;
  Index dim = 0;
};

}  // namespace kfpso
