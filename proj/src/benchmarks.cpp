#include "kfpso/benchmarks.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace kfpso {

namespace {

constexpr double kPi = std::numbers::pi;

double ackley(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  double sq = 0.0;
  double cs = 0.0;
  for (double v : x) {
    sq += v * v;
    cs += std::cos(2.0 * kPi * v);
  }
  return -20.0 * std::exp(-0.2 * std::sqrt(sq / n)) - std::exp(cs / n) + 20.0 + std::numbers::e;
}

double griewank(std::span<const double> x) {
  double sum = 0.0;
  double prod = 1.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    sum += x[d] * x[d];
    prod *= std::cos(x[d] / std::sqrt(static_cast<double>(d + 1)));
  }
  return sum / 4000.0 - prod + 1.0;
}

double modulus_sum(std::span<const double> x) {
  double s = 60.0;
  for (double v : x) s += std::abs(v);
  return s;
}

double rastrigin(std::span<const double> x) {
  double s = 100.0;
  for (double v : x) s += v * v - 10.0 * std::cos(2.0 * kPi * v);
  return s;
}

double salomon(std::span<const double> x) {
  double sq = 0.0;
  for (double v : x) sq += v * v;
  const double n = static_cast<double>(x.size());
  return 1.0 - std::cos(2.0 * kPi * std::sqrt(sq / n)) + 0.1 * sq;
}

double schwefel(std::span<const double> x) {
  double s = 5000.0;
  for (double v : x) s += -v * std::sin(std::sqrt(std::abs(v)));
  return s;
}

double rosenbrock(std::span<const double> x) {
  double s = 0.0;
  for (std::size_t d = 0; d + 1 < x.size(); ++d) {
    const double a = x[d] - 1.0;
    const double b = x[d + 1] - x[d] * x[d];
    s += (a * a + b * b) * 100.0;
  }
  return s;
}

// Monotone staircase; the optimum sits on the lower corner of the box.
double step(std::span<const double> x) {
  double s = 60.0;
  for (double v : x) s += std::floor(v);
  return s;
}

constexpr std::array<BenchmarkFunction, 8> kRegistry{{
    {"ackley", &ackley, -30.0, 30.0, 0.0, 1},
    {"griewank", &griewank, -600.0, 600.0, 0.0, 1},
    {"modulus_sum", &modulus_sum, -5.12, 5.12, 0.0, 1},
    {"rastrigin", &rastrigin, -5.12, 5.12, 0.0, 1},
    {"salomon", &salomon, -100.0, 100.0, 0.0, 1},
    {"schwefel", &schwefel, -500.0, 500.0, 420.968746, 1},
    {"rosenbrock", &rosenbrock, -30.0, 30.0, 1.0, 2},
    {"step", &step, -5.12, 5.12, -5.12, 1, true},
}};

}  // namespace

double BenchmarkFunction::operator()(const Vector& x) const {
  if (x.size() < min_dim) {
    throw Error(std::string(name) + " requires dimension >= " + std::to_string(min_dim));
  }
  return eval(as_span(x));
}

std::span<const BenchmarkFunction> benchmark_registry() { return kRegistry; }

const BenchmarkFunction& find_benchmark(std::string_view name) {
  for (const auto& f : kRegistry) {
    if (f.name == name) return f;
  }
  throw Error("unknown benchmark function '" + std::string(name) + "'");
}

double eval_benchmark(std::string_view name, const Vector& x) { return find_benchmark(name)(x); }

ShiftedProblem make_shifted_problem(const BenchmarkFunction& base, const Vector& shift) {
  const Index dim = shift.size();
  if (dim < base.min_dim) throw Error(std::string(base.name) + ": dimension too small");
  const double width = base.default_upper - base.default_lower;
  const double limit = kMaxShiftFraction * width;
  if ((shift.array().abs() > limit).any()) throw Error("bound shift exceeds 40% of the range");
  SearchSpace space(Vector::Constant(dim, base.default_lower) + shift,
                    Vector::Constant(dim, base.default_upper) + shift);
  Vector truth = base.ground_truth(dim);
  if (!space.strictly_contains(truth)) throw Error("shifted bounds do not contain the ground truth");
  if (base.truth_at_lower_corner) truth = space.lower();
  return ShiftedProblem{&base, dim, std::move(space), std::move(truth)};
}

ShiftedProblem make_shifted_problem(const BenchmarkFunction& base, Index dim, RngStream& rng) {
  if (dim < base.min_dim) throw Error(std::string(base.name) + ": dimension too small");
  const double width = base.default_upper - base.default_lower;
  const double limit = kMaxShiftFraction * width;
  const double truth = base.truth_coordinate;
  Vector shift(dim);
  for (Index d = 0; d < dim; ++d) {
    double s;
    do {
      s = rng.uniform(-limit, limit);
    } while (!(base.default_lower + s < truth && truth < base.default_upper + s));
    shift[d] = s;
  }
  return make_shifted_problem(base, shift);
}

Index draw_dimension(RngStream& rng) {
  return static_cast<Index>(rng.uniform_int(kMinProtocolDim, kMaxProtocolDim));
}

double error_norm(const Vector& returned, const Vector& truth) {
  if (returned.size() != truth.size()) throw Error("error_norm: length mismatch");
  return (returned - truth).norm();
}

}  // namespace kfpso
