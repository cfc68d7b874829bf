#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kfpso/harness.hpp"

using namespace kfpso;
namespace fs = std::filesystem;

namespace {

ExperimentPlan small_plan() {
  ExperimentPlan p;
  p.functions = {"ackley", "step"};
  p.methods = {"original", "lds-kf", "spo-ukf"};
  p.trials = 4;
  p.master_seed = 5;
  p.swarm_size = 10;
  p.max_iterations = 15;
  return p;
}

bool same_point(const Vector& a, const Vector& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

}  // namespace

TEST_CASE("CSV formatting") {
  SummaryRow r{"ackley", "lds-kf", 0.5, 1234567.0, 300, 9000, 0.000123, 100};
  const std::string csv = format_csv({r});
  CHECK(csv == std::string(kCsvHeader) + "\nackley,lds-kf,0.500000,1.23457e+06,300.000,9000.00,0.000123000\n");
}

TEST_CASE("CSV round trip") {
  std::vector<SummaryRow> rows{{"griewank", "original", 3.25, 0.0, 299.5, 8985, 0.25, 2},
                               {"step", "spo-ukf", 1e-7, 2.5e-3, 1, 60, 1.5, 2}};
  const auto back = parse_csv(format_csv(rows));
  REQUIRE(back.size() == 2);
  CHECK(back[1].function == "step");
  CHECK(back[1].mean_error == doctest::Approx(1e-7));
  CHECK(back[0].mean_iterations == 299.5);
  CHECK_THROWS_AS(parse_csv("nope\n"), Error);
  CHECK_THROWS_AS(parse_csv(std::string(kCsvHeader) + "\na,b,1\n"), Error);

  const fs::path path = fs::temp_directory_path() / "kfpso_test_harness.csv";
  emit_csv(rows, path);
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == format_csv(rows));
  CHECK_THROWS_AS(emit_csv({}, path), Error);
  CHECK_THROWS_AS(emit_csv(rows, "/nonexistent-dir/x.csv"), Error);
}

TEST_CASE("list expansion") {
  CHECK(expand_function_list("all").size() == 8);
  CHECK(expand_function_list("ackley, step") == std::vector<std::string>{"ackley", "step"});
  CHECK_THROWS_WITH_AS(expand_function_list("ackley,sphere"), doctest::Contains("unknown benchmark"), Error);
  CHECK(expand_method_list("all") == std::vector<std::string>{"original", "lds-kf", "spo-ukf"});
  CHECK_THROWS_AS(expand_method_list("lds"), Error);
}

TEST_CASE("plan validation") {
  auto p = small_plan();
  CHECK_NOTHROW(p.validate());
  p.methods = {"nested-ukf"};
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("two similarity measures"), Error);
  p = small_plan();
  p.trials = 0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = small_plan();
  p.functions.clear();
  CHECK_THROWS_AS(p.validate(), Error);
  p = small_plan();
  p.fixed_dim = 0;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("summaries use the population standard deviation") {
  std::vector<TrialRecord> t(4);
  const double errs[] = {1, 2, 3, 4};
  for (int i = 0; i < 4; ++i) {
    t[i].error = errs[i];
    t[i].iterations = 10 * (i + 1);
    t[i].evaluations = 300;
  }
  const auto row = summarize("f", "m", t);
  CHECK(row.mean_error == 2.5);
  CHECK(row.std_error == doctest::Approx(std::sqrt(1.25)));
  CHECK(row.mean_iterations == 25.0);
  CHECK(row.trials == 4);
  CHECK_THROWS_AS(summarize("f", "m", {}), Error);
}

TEST_CASE("methods share the problem and the initial swarm") {
  const auto p = small_plan();
  const auto& f = find_benchmark("ackley");
  const auto a = make_trial_setup(f, p, 2);
  const auto b = make_trial_setup(f, p, 2);
  CHECK(a.initial.positions == b.initial.positions);
  CHECK(a.problem.space.lower() == b.problem.space.lower());
  CHECK(make_trial_setup(f, p, 3).problem.space.lower() != a.problem.space.lower());

  // Shared steps mean original and a guided run see identical inputs, and
  // every record reports the trial dimension.
  const auto recs = run_benchmark_trial(f, {Mode::original, Mode::lds_kf}, p, 2);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].dim == a.problem.dim);
  CHECK(recs[1].dim == a.problem.dim);
  const auto solo = run_benchmark_trial(f, {Mode::lds_kf}, p, 2);
  CHECK(same_point(solo[0].returned_point, recs[1].returned_point));
}

TEST_CASE("trial i depends only on the seed and i") {
  auto p = small_plan();
  TrialTable few, many;
  run_experiment(p, &few);
  p.trials = 6;
  run_experiment(p, &many);
  for (std::size_t fi = 0; fi < 2; ++fi)
    for (std::size_t mi = 0; mi < 3; ++mi)
      for (std::size_t t = 0; t < 4; ++t) {
        REQUIRE(same_point(few[fi][mi][t].returned_point, many[fi][mi][t].returned_point));
      }
}

TEST_CASE("worker count does not change results") {
  auto p = small_plan();
  p.workers = 1;
  const auto serial = run_experiment(p);
  p.workers = 3;
  const auto parallel = run_experiment(p);
  REQUIRE(serial.size() == 6);
  REQUIRE(parallel.size() == 6);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].function == parallel[i].function);
    CHECK(serial[i].method == parallel[i].method);
    CHECK(serial[i].mean_error == parallel[i].mean_error);
    CHECK(serial[i].std_error == parallel[i].std_error);
    CHECK(serial[i].mean_iterations == parallel[i].mean_iterations);
    CHECK(serial[i].mean_evaluations == parallel[i].mean_evaluations);
  }
  CHECK(serial[0].function == "ackley");
  CHECK(serial[2].method == "spo-ukf");
  CHECK(serial[3].function == "step");
}

TEST_CASE("fixed dimension is honoured, with Rosenbrock's minimum") {
  auto p = small_plan();
  p.functions = {"rosenbrock"};
  p.fixed_dim = 1;
  TrialTable raw;
  run_experiment(p, &raw);
  CHECK(raw[0][0][0].dim == 2);
  p.functions = {"ackley"};
  p.fixed_dim = 7;
  run_experiment(p, &raw);
  CHECK(raw[0][2][3].dim == 7);
}

TEST_CASE("registration demo is reproducible and writes its outputs") {
  RegistrationDemoOptions opt;
  opt.truth = RigidTransform2D{7, -4, 0.15};
  opt.max_iterations = 12;
  const auto a = run_registration_demo(3, Mode::lds_kf, opt);
  const auto b = run_registration_demo(3, Mode::lds_kf, opt);
  CHECK(same_point(a.record.returned_point, b.record.returned_point));
  CHECK(a.record.iterations == 12);
  CHECK(a.tre.mean == a.record.error);

  const std::string csv = format_registration_csv(a);
  CHECK(csv.rfind(std::string(kRegistrationCsvHeader) + "\nlds-kf,3,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), ',') == 2 * 13);

  const fs::path dir = fs::temp_directory_path() / "kfpso_test_reg_out";
  fs::remove_all(dir);
  write_registration_outputs(a, dir);
  for (const char* f : {"reference.pgm", "floating.pgm", "before.pgm", "after.pgm", "landmarks.txt", "result.csv"}) {
    CHECK(fs::exists(dir / f));
  }
  CHECK(read_landmarks(dir / "landmarks.txt").size() == a.pair.landmarks.size());

  // A drawn truth stays within the demo range.
  const auto drawn = run_registration_demo(9, Mode::original, RegistrationDemoOptions{std::nullopt, {}, 10, 3});
  CHECK(std::abs(drawn.truth.tx) <= 12.0);
  CHECK(std::abs(drawn.truth.angle) <= 0.25);
  const auto nested = run_registration_demo(9, Mode::nested_ukf, RegistrationDemoOptions{std::nullopt, {}, 10, 3});
  CHECK(nested.record.iterations == 3);
}

TEST_CASE("SPO registration recovers a seeded transform to within 2 mm") {
  RegistrationDemoOptions opt;
  opt.truth = RigidTransform2D{7, -4, 0.15};
  const auto r = run_registration_demo(1, Mode::spo_ukf, opt);
  CHECK(r.tre.mean < 2.0);
  CHECK(r.record.evaluations == 2 * 30 * r.record.iterations);
}
