#include "kfpso/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace kfpso {

namespace {

// Sub-stream tags within one trial stream.
constexpr std::uint64_t kProblemTag = 0;
constexpr std::uint64_t kSwarmTag = 1;
constexpr std::uint64_t kStepTag = 2;

std::size_t function_index(const BenchmarkFunction& f) {
  const auto reg = benchmark_registry();
  return static_cast<std::size_t>(&f - reg.data());
}

std::vector<std::string> split_list(const std::string& spec) {
  std::vector<std::string> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%#.6g", v);
  return buf;
}

}  // namespace

void ExperimentPlan::validate() const {
  if (functions.empty()) throw Error("experiment plan needs at least one function");
  if (methods.empty()) throw Error("experiment plan needs at least one method");
  if (trials == 0) throw Error("experiment plan needs at least one trial");
  for (const auto& f : functions) (void)find_benchmark(f);
  for (const auto& m : methods) {
    if (parse_mode(m) == Mode::nested_ukf) {
      throw Error("nested-ukf needs two similarity measures and is not run on single-objective benchmarks");
    }
  }
  if (fixed_dim && (*fixed_dim < 1)) throw Error("fixed dimension must be positive");
  if (swarm_size < 2) throw Error("swarm too small: need at least 2 particles");
}

std::vector<std::string> expand_function_list(const std::string& spec) {
  if (spec == "all") {
    std::vector<std::string> out;
    for (const auto& f : benchmark_registry()) out.emplace_back(f.name);
    return out;
  }
  auto out = split_list(spec);
  for (const auto& f : out) (void)find_benchmark(f);
  return out;
}

std::vector<std::string> expand_method_list(const std::string& spec) {
  if (spec == "all") return {"original", "lds-kf", "spo-ukf"};
  auto out = split_list(spec);
  for (const auto& m : out) (void)parse_mode(m);
  return out;
}

TrialSetup make_trial_setup(const BenchmarkFunction& function, const ExperimentPlan& plan, std::size_t trial) {
  const RngStream trial_stream(plan.master_seed, trial);
  const std::uint64_t base = 16 * function_index(function);
  RngStream problem_rng = trial_stream.fork(base + kProblemTag);
  Index dim = plan.fixed_dim ? *plan.fixed_dim : draw_dimension(problem_rng);
  dim = std::max(dim, function.min_dim);
  ShiftedProblem problem = make_shifted_problem(function, dim, problem_rng);
  RngStream swarm_rng = trial_stream.fork(base + kSwarmTag);
  Swarm initial = init_swarm(problem.space, plan.swarm_size, swarm_rng);
  return TrialSetup{std::move(problem), std::move(initial)};
}

std::vector<TrialRecord> run_benchmark_trial(const BenchmarkFunction& function, const std::vector<Mode>& methods,
                                             const ExperimentPlan& plan, std::size_t trial) {
  const TrialSetup setup = make_trial_setup(function, plan, trial);
  const ShiftedProblem& shifted = setup.problem;
  Problem problem{shifted.space, FitnessProfile{[&shifted](const Vector& x) { return shifted(x); },
                                                Orientation::difference},
                  std::nullopt};
  const RngStream trial_stream(plan.master_seed, trial);
  const std::uint64_t base = 16 * function_index(function);

  std::vector<TrialRecord> records;
  for (Mode mode : methods) {
    PsoConfig config = PsoConfig::defaults(mode);
    config.swarm_size = plan.swarm_size;
    config.max_iterations = plan.max_iterations;
    RngStream step_rng = trial_stream.fork(base + kStepTag);
    const auto start = std::chrono::steady_clock::now();
    RunResult run = run_optimizer(problem, config, setup.initial, step_rng);
    const auto stop = std::chrono::steady_clock::now();
    TrialRecord rec;
    rec.error = error_norm(run.returned_point, shifted.ground_truth);
    rec.returned_point = std::move(run.returned_point);
    rec.iterations = run.iterations;
    rec.evaluations = run.evaluations;
    rec.wall_seconds = std::chrono::duration<double>(stop - start).count();
    rec.mode = mode;
    rec.seed = plan.master_seed;
    rec.dim = shifted.dim;
    records.push_back(std::move(rec));
  }
  return records;
}

SummaryRow summarize(const std::string& function, const std::string& method, const std::vector<TrialRecord>& trials) {
  if (trials.empty()) throw Error("summarize: no trials");
  SummaryRow row;
  row.function = function;
  row.method = method;
  row.trials = trials.size();
  const double n = static_cast<double>(trials.size());
  for (const auto& t : trials) {
    row.mean_error += t.error;
    row.mean_iterations += static_cast<double>(t.iterations);
    row.mean_evaluations += static_cast<double>(t.evaluations);
    row.mean_seconds += t.wall_seconds;
  }
  row.mean_error /= n;
  row.mean_iterations /= n;
  row.mean_evaluations /= n;
  row.mean_seconds /= n;
  double ss = 0.0;
  for (const auto& t : trials) ss += (t.error - row.mean_error) * (t.error - row.mean_error);
  row.std_error = std::sqrt(ss / n);
  return row;
}

std::vector<SummaryRow> run_experiment(const ExperimentPlan& plan, TrialTable* raw) {
  plan.validate();
  std::vector<Mode> modes;
  for (const auto& m : plan.methods) modes.push_back(parse_mode(m));

  const std::size_t nf = plan.functions.size();
  TrialTable table(nf, std::vector<std::vector<TrialRecord>>(modes.size(), std::vector<TrialRecord>(plan.trials)));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const std::size_t tasks = nf * plan.trials;
  auto worker = [&] {
    for (std::size_t task = next.fetch_add(1); task < tasks; task = next.fetch_add(1)) {
      const std::size_t fi = task / plan.trials;
      const std::size_t trial = task % plan.trials;
      try {
        auto records = run_benchmark_trial(find_benchmark(plan.functions[fi]), modes, plan, trial);
        for (std::size_t mi = 0; mi < modes.size(); ++mi) table[fi][mi][trial] = std::move(records[mi]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(tasks);
      }
    }
  };
  const unsigned workers = std::max(1u, plan.workers);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<SummaryRow> rows;
  for (std::size_t fi = 0; fi < nf; ++fi) {
    for (std::size_t mi = 0; mi < modes.size(); ++mi) {
      rows.push_back(summarize(plan.functions[fi], plan.methods[mi], table[fi][mi]));
    }
  }
  if (raw) *raw = std::move(table);
  return rows;
}

std::string format_csv(const std::vector<SummaryRow>& rows) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += r.function + ',' + r.method + ',' + format_number(r.mean_error) + ',' + format_number(r.std_error) + ',' +
           format_number(r.mean_iterations) + ',' + format_number(r.mean_evaluations) + ',' +
           format_number(r.mean_seconds) + '\n';
  }
  return out;
}

void emit_csv(const std::vector<SummaryRow>& rows, const std::filesystem::path& path) {
  if (rows.empty()) throw Error("emit_csv: no rows");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << format_csv(rows);
  out.flush();
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

std::vector<SummaryRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw Error("parse_csv: missing or unexpected header");
  std::vector<SummaryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) throw Error("parse_csv: expected 7 columns");
    SummaryRow r;
    r.function = cells[0];
    r.method = cells[1];
    r.mean_error = std::stod(cells[2]);
    r.std_error = std::stod(cells[3]);
    r.mean_iterations = std::stod(cells[4]);
    r.mean_evaluations = std::stod(cells[5]);
    r.mean_seconds = std::stod(cells[6]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace kfpso

namespace kfpso {

namespace {

constexpr std::uint64_t kTruthTag = 1;
constexpr std::uint64_t kPairTag = 2;
constexpr std::uint64_t kRegSwarmTag = 3;
constexpr std::uint64_t kRegStepTag = 4;

}  // namespace

RegistrationDemoResult run_registration_demo(std::uint64_t seed, Mode method, const RegistrationDemoOptions& options) {
  const RngStream root(seed, 0);
  RegistrationDemoResult out;
  if (options.truth) {
    out.truth = *options.truth;
  } else {
    RngStream t = root.fork(kTruthTag);
    out.truth.tx = t.uniform(-12.0, 12.0);
    out.truth.ty = t.uniform(-12.0, 12.0);
    out.truth.angle = t.uniform(-0.25, 0.25);
  }
  RngStream pair_rng = root.fork(kPairTag);
  out.pair = make_synthetic_pair(pair_rng, out.truth, options.synthetic);
  out.roi = select_roi(out.pair.reference);

  const Image2D& ref = out.pair.reference;
  const Image2D& flo = out.pair.floating;
  const Roi roi = out.roi;
  Vector lower(3), upper(3);
  lower << -kMaxDemoTranslation, -kMaxDemoTranslation, -kMaxDemoAngle;
  upper << kMaxDemoTranslation, kMaxDemoTranslation, kMaxDemoAngle;
  Problem problem{SearchSpace(lower, upper),
                  FitnessProfile{[&ref, &flo, roi](const Vector& x) {
                                   return mutual_information(ref, flo, RigidTransform2D::from_vector(x),
                                                             kDefaultMiBins, roi);
                                 },
                                 Orientation::similarity},
                  std::nullopt};
  if (method == Mode::nested_ukf) {
    problem.secondary = FitnessProfile{[&ref, &flo, roi](const Vector& x) {
                                         return gradient_similarity(ref, flo, RigidTransform2D::from_vector(x), roi);
                                       },
                                       Orientation::similarity};
  }

  PsoConfig config = PsoConfig::defaults(method);
  config.swarm_size = options.swarm_size;
  config.max_iterations = options.max_iterations;
  RngStream swarm_rng = root.fork(kRegSwarmTag);
  const Swarm initial = init_swarm(problem.space, config.swarm_size, swarm_rng);
  RngStream step_rng = root.fork(kRegStepTag);

  const auto start = std::chrono::steady_clock::now();
  RunResult run = run_optimizer(problem, config, initial, step_rng);
  const auto stop = std::chrono::steady_clock::now();

  out.recovered = RigidTransform2D::from_vector(run.returned_point);
  out.tre = target_registration_error(out.pair.landmarks, out.recovered, out.truth);
  out.record.returned_point = std::move(run.returned_point);
  out.record.error = out.tre.mean;
  out.record.iterations = run.iterations;
  out.record.evaluations = run.evaluations;
  out.record.wall_seconds = std::chrono::duration<double>(stop - start).count();
  out.record.mode = method;
  out.record.seed = seed;
  out.record.dim = 3;
  out.before = resample(flo, RigidTransform2D{}, ref);
  out.after = resample(flo, out.recovered, ref);
  return out;
}

std::string format_registration_csv(const RegistrationDemoResult& r) {
  std::string out = kRegistrationCsvHeader;
  out += '\n';
  out += std::string(mode_name(r.record.mode)) + ',' + std::to_string(r.record.seed);
  for (double v : {r.recovered.tx, r.recovered.ty, r.recovered.angle, r.truth.tx, r.truth.ty, r.truth.angle,
                   r.tre.mean, r.tre.median, r.tre.std}) {
    out += ',' + format_number(v);
  }
  out += ',' + std::to_string(r.record.iterations) + ',' + std::to_string(r.record.evaluations) + ',' +
         format_number(r.record.wall_seconds) + '\n';
  return out;
}

void write_registration_outputs(const RegistrationDemoResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create '" + dir.string() + "': " + ec.message());
  write_pgm(result.pair.reference, dir / "reference.pgm");
  write_pgm(result.pair.floating, dir / "floating.pgm");
  write_pgm(result.before, dir / "before.pgm");
  write_pgm(result.after, dir / "after.pgm");
  write_landmarks(result.pair.landmarks, dir / "landmarks.txt");
  std::ofstream out(dir / "result.csv", std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + (dir / "result.csv").string() + "' for writing");
  out << format_registration_csv(result);
  if (!out) throw Error("failed writing result.csv");
}

}  // namespace kfpso
