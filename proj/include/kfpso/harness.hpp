#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kfpso/benchmarks.hpp"
#include "kfpso/optimizers.hpp"
#include "kfpso/registration.hpp"

namespace kfpso {

/// Benchmark experiment: every method on every function, `trials` shifted
/// problems per function.
struct ExperimentPlan {
  std::vector<std::string> functions;
  std::vector<std::string> methods;
  std::size_t trials = 100;
  /// Unset: dimension drawn uniformly from [2, 30] per trial.
  std::optional<Index> fixed_dim;
  std::uint64_t master_seed = 0;
  Index swarm_size = 30;
  std::size_t max_iterations = 300;
  unsigned workers = 1;

  void validate() const;
};

struct SummaryRow {
  std::string function;
  std::string method;
  double mean_error = 0.0;
  double std_error = 0.0;
  double mean_iterations = 0.0;
  double mean_evaluations = 0.0;
  double mean_seconds = 0.0;
  std::size_t trials = 0;
};

/// Raw trial records grouped as [function][method][trial].
using TrialTable = std::vector<std::vector<std::vector<TrialRecord>>>;

/// Runs one benchmark trial for every method in the plan. All methods share
/// the problem and the initial swarm; each method gets its own copy of the
/// same step stream.
std::vector<TrialRecord> run_benchmark_trial(const BenchmarkFunction& function, const std::vector<Mode>& methods,
                                             const ExperimentPlan& plan, std::size_t trial);

/// Problem and initial swarm of one trial (exposed for fairness checks).
struct TrialSetup {
  ShiftedProblem problem;
  Swarm initial;
};
TrialSetup make_trial_setup(const BenchmarkFunction& function, const ExperimentPlan& plan, std::size_t trial);

/// Runs the plan. Trials may run on several workers; results are
/// aggregated in (function, method, trial) order regardless of completion
/// order. Throws Error on unknown function or method names.
std::vector<SummaryRow> run_experiment(const ExperimentPlan& plan, TrialTable* raw = nullptr);

/// Mean and population standard deviation per (function, method).
SummaryRow summarize(const std::string& function, const std::string& method, const std::vector<TrialRecord>& trials);

inline constexpr const char* kCsvHeader =
    "function,method,mean_error,std_error,mean_iterations,mean_evaluations,mean_seconds";

/// CSV text: fixed header, one line per row, numbers with 6 significant
/// digits, newline-terminated.
std::string format_csv(const std::vector<SummaryRow>& rows);

/// Writes format_csv(rows) to `path`. Throws Error for empty input or an
/// unwritable path.
void emit_csv(const std::vector<SummaryRow>& rows, const std::filesystem::path& path);

/// Parses text produced by format_csv.
std::vector<SummaryRow> parse_csv(const std::string& text);

/// Expands "all" or a comma-separated list.
std::vector<std::string> expand_function_list(const std::string& spec);
std::vector<std::string> expand_method_list(const std::string& spec);

struct RegistrationDemoOptions {
  /// Unset: drawn from the seed within |t| <= 12 mm, |angle| <= 0.25 rad.
  std::optional<RigidTransform2D> truth;
  SyntheticOptions synthetic;
  Index swarm_size = 30;
  std::size_t max_iterations = 300;
};

struct RegistrationDemoResult {
  TrialRecord record;  // error = mean TRE in mm
  RigidTransform2D truth;
  RigidTransform2D recovered;
  TreStatistics tre;
  SyntheticPair pair;
  Roi roi;
  Image2D before;  // floating image on the reference grid, identity transform
  Image2D after;   // floating image on the reference grid, recovered transform
};

/// Synthetic rigid registration: (tx, ty, angle) searched over +-20 mm x
/// +-20 mm x +-0.35 rad, maximizing mutual information over the Otsu ROI of
/// the reference. Nested mode adds gradient_similarity as the second measure.
RegistrationDemoResult run_registration_demo(std::uint64_t seed, Mode method,
                                             const RegistrationDemoOptions& options = {});

inline constexpr const char* kRegistrationCsvHeader =
    "method,seed,tx,ty,angle,true_tx,true_ty,true_angle,tre_mean,tre_median,tre_std,iterations,evaluations,"
    "seconds";

std::string format_registration_csv(const RegistrationDemoResult& result);

/// Writes reference.pgm, floating.pgm, before.pgm, after.pgm, landmarks.txt
/// and result.csv into `dir` (created if missing).
void write_registration_outputs(const RegistrationDemoResult& result, const std::filesystem::path& dir);

}  // namespace kfpso
