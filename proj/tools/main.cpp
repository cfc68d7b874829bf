#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <thread>

#include "kfpso/harness.hpp"
#include "selftest.hpp"

namespace {

using namespace kfpso;

std::optional<Index> parse_dim(const std::string& text) {
  if (text == "random") return std::nullopt;
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || v < 1) throw Error("--dim must be 'random' or a positive integer, got '" + text + "'");
  return static_cast<Index>(v);
}

int run_bench(const std::string& functions, const std::string& methods, std::size_t trials, const std::string& dim,
              std::uint64_t seed, const std::string& out, unsigned workers) {
  ExperimentPlan plan;
  plan.functions = expand_function_list(functions);
  plan.methods = expand_method_list(methods);
  plan.trials = trials;
  plan.fixed_dim = parse_dim(dim);
  plan.master_seed = seed;
  plan.workers = workers;
  const auto rows = run_experiment(plan);
  emit_csv(rows, out);
  std::fputs(format_csv(rows).c_str(), stdout);
  return 0;
}

int run_register(const std::string& method, std::uint64_t seed, const std::string& out) {
  const auto result = run_registration_demo(seed, parse_mode(method));
  write_registration_outputs(result, out);
  std::fputs(format_registration_csv(result).c_str(), stdout);
  return 0;
}

int run_selftest() {
  const auto results = selftest::run_checks(selftest::default_checks());
  std::size_t failed = 0;
  for (const auto& r : results) {
    std::printf("%s %s%s%s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.empty() ? "" : ": ",
                r.detail.c_str());
    failed += r.passed ? 0 : 1;
  }
  std::printf("%zu/%zu checks passed\n", results.size() - failed, results.size());
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kalman-filter-guided particle swarm optimizers"};
  app.require_subcommand(1);

  std::string functions = "all", methods = "all", dim = "random", out;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  auto* bench = app.add_subcommand("bench", "Run the shifted benchmark protocol and write summary CSV");
  bench->add_option("--functions", functions, "Comma-separated benchmark names or 'all'");
  bench->add_option("--methods", methods, "Comma-separated methods (original, lds-kf, spo-ukf) or 'all'");
  bench->add_option("--trials", trials, "Trials per function")->check(CLI::PositiveNumber);
  bench->add_option("--dim", dim, "'random' (uniform 2..30) or a fixed dimension");
  bench->add_option("--seed", seed, "Master seed");
  bench->add_option("--out", out, "Output CSV path")->required();
  bench->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

  std::string method = "spo-ukf", out_dir;
  std::uint64_t reg_seed = 0;
  auto* reg = app.add_subcommand("register", "Register a synthetic image pair and report TRE");
  reg->add_option("--method", method, "original, lds-kf, spo-ukf or nested-ukf");
  reg->add_option("--seed", reg_seed, "Seed");
  reg->add_option("--out", out_dir, "Output directory")->required();

  app.add_subcommand("selftest", "Run the built-in invariant and oracle checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*bench) return run_bench(functions, methods, trials, dim, seed, out, workers);
    if (*reg) return run_register(method, reg_seed, out_dir);
    return run_selftest();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
