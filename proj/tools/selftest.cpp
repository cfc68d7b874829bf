#include "selftest.hpp"

#include <cmath>
#include <exception>
#include <numeric>

#include "kfpso/benchmarks.hpp"
#include "kfpso/estimator.hpp"
#include "kfpso/harness.hpp"
#include "kfpso/kalman.hpp"
#include "kfpso/optimizers.hpp"
#include "kfpso/registration.hpp"
#include "kfpso/simd/kernels.hpp"

namespace kfpso::selftest {

namespace {

std::string expect(bool ok, const std::string& what) { return ok ? std::string() : what; }

std::string check_rng() {
  RngStream a(1, 0), b(1, 0);
  for (int i = 0; i < 100; ++i) {
    if (a.next_u64() != b.next_u64()) return "streams with equal keys diverged";
  }
  return expect(RngStream(1, 0).fork(3).next_u64() == RngStream(1, 0).fork(3).next_u64(), "fork not keyed");
}

std::string check_benchmarks() {
  for (const auto& f : benchmark_registry()) {
    if (f.truth_at_lower_corner) continue;
    const Vector t = f.ground_truth(4);
    const Vector off = t + Vector::Constant(4, 0.37);
    if (!(f(t) < f(off))) return std::string(f.name) + ": truth not better than a nearby point";
  }
  return expect(std::abs(eval_benchmark("ackley", Vector::Zero(5))) < 1e-12, "ackley(0) != 0");
}

std::string check_estimator() {
  PointMatrix p(2, 1);
  p << 0, 2;
  const std::vector<double> w{1, 3};
  if (weighted_mean_optimum(p, w).point[0] != 1.5) return "weighted mean example";
  const std::vector<double> v{0.0, 7.5};
  const Vector n = normalize_fitness(v, Orientation::difference);
  return expect(n[0] == 1.0 && std::abs(n[1] - std::exp(-1.0)) < 1e-14, "difference normalization");
}

std::string check_kalman() {
  GaussianBelief prior{Vector::Zero(1), Matrix::Identity(1, 1)};
  const auto post = kf_measurement_update(prior, Vector::Constant(1, 4.0), Matrix::Identity(1, 1),
                                          Matrix::Identity(1, 1));
  if (std::abs(post.mean[0] - 2.0) > 1e-12 || std::abs(post.covariance(0, 0) - 0.5) > 1e-12) {
    return "scalar update example";
  }
  Matrix a(2, 2);
  a << 1.0, 0.5, -0.3, 2.0;
  Matrix cov(2, 2);
  cov << 2.0, 0.3, 0.3, 1.0;
  GaussianBelief b{Vector::Constant(2, 1.0), cov};
  const auto s = sigma_points_standard(b, default_kappa(2));
  if (std::abs(std::accumulate(s.weights.begin(), s.weights.end(), 0.0) - 1.0) > 1e-12) return "weights sum";
  const auto out = ut_propagate(s, [&](const Vector& x) { return Vector(a * x); }, Matrix::Zero(2, 2));
  return expect((out.covariance - a * cov * a.transpose()).norm() < 1e-8, "unscented transform on a linear map");
}

std::string check_simd() {
  RngStream rng(7, 7);
  const std::size_t k = 5, d = 7;
  auto draw = [&](std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
  };
  const auto x0 = draw(k * d, -3, 3), v0 = draw(k * d, -3, 3), pb = draw(k * d, -2, 2), gb = draw(d, -2, 2),
             th = draw(d, -2, 2), rp = draw(k * d, 0, 1), rg = draw(k * d, 0, 1), rt = draw(k * d, 0, 1);
  const std::vector<double> lo(d, -2.0), hi(d, 2.0);
  auto run = [&](simd::Level level, std::vector<double>& x, std::vector<double>& v) {
    simd::set_level(level);
    simd::swarm_step({x, v, pb, gb, th, rp, rg, rt, lo, hi, 0.7, 2.0, 1.0, 1.0});
  };
  std::vector<double> xs = x0, vs = v0;
  run(simd::Level::scalar, xs, vs);
  std::string result;
  const auto detected = simd::detected_level();
  if (detected != simd::Level::scalar) {
    std::vector<double> xv = x0, vv = v0;
    run(detected, xv, vv);
    if (xs != xv || vs != vv) result = std::string(simd::level_name(detected)) + " swarm step differs from scalar";
  }
  simd::reset_level();
  return result;
}

std::string check_optimizer() {
  const auto& f = find_benchmark("ackley");
  const SearchSpace space = f.default_space(3);
  Problem p{space, FitnessProfile{[&f](const Vector& x) { return f(x); }, Orientation::difference}, std::nullopt};
  auto cfg = PsoConfig::defaults(Mode::spo_ukf);
  cfg.max_iterations = 20;
  RngStream init(11, 0), rng(11, 1);
  const auto r = run_spo_ukfpso(p, cfg, init_swarm(space, cfg.swarm_size, init), rng);
  if (r.evaluations != 2 * static_cast<std::size_t>(cfg.swarm_size) * r.iterations) return "SPO evaluation count";
  return expect(space.contains(r.returned_point), "returned point outside the box");
}

std::string check_registration() {
  RngStream rng(12, 0);
  const RigidTransform2D truth{7, -4, 0.15};
  const auto pair = make_synthetic_pair(rng, truth);
  const Roi roi = select_roi(pair.reference);
  const double at_truth = mutual_information(pair.reference, pair.floating, truth, kDefaultMiBins, roi);
  const double off = mutual_information(pair.reference, pair.floating, RigidTransform2D{}, kDefaultMiBins, roi);
  if (!(at_truth > off)) return "MI not larger at the true transform";
  return expect(target_registration_error(pair.landmarks, truth, truth).mean == 0.0, "TRE at truth");
}

std::string check_harness() {
  SummaryRow r{"ackley", "original", 0.5, 0.0, 1.0, 2.0, 0.0, 1};
  const auto back = parse_csv(format_csv({r}));
  return expect(back.size() == 1 && back[0].mean_error == 0.5, "CSV round trip");
}

}  // namespace

std::vector<Check> default_checks() {
  return {
      {"rng streams", check_rng},
      {"benchmark optima", check_benchmarks},
      {"estimator examples", check_estimator},
      {"kalman and unscented transform", check_kalman},
      {"simd equivalence", check_simd},
      {"spo evaluation budget", check_optimizer},
      {"registration similarity", check_registration},
      {"csv round trip", check_harness},
  };
}

std::vector<CheckResult> run_checks(const std::vector<Check>& checks) {
  std::vector<CheckResult> out;
  for (const auto& c : checks) {
    CheckResult r{c.name, false, {}};
    try {
      r.detail = c.run();
      r.passed = r.detail.empty();
    } catch (const std::exception& e) {
      r.detail = std::string("exception: ") + e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace kfpso::selftest
