#pragma once

#include <span>
#include <string_view>

#include "kfpso/core.hpp"

namespace kfpso {

/// A minimization test function on a cube domain.
struct BenchmarkFunction {
  std::string_view name;
  double (*eval)(std::span<const double> x);
  double default_lower;
  double default_upper;
  /// Per-axis coordinate of the tabulated optimum.
  double truth_coordinate;
  Index min_dim;
  /// The optimum is the lower corner of whatever box is searched (Step), so
  /// a shifted problem reports that corner rather than the tabulated point.
  bool truth_at_lower_corner = false;

  SearchSpace default_space(Index dim) const { return SearchSpace::cube(dim, default_lower, default_upper); }
  Vector ground_truth(Index dim) const { return Vector::Constant(dim, truth_coordinate); }
  double operator()(const Vector& x) const;
};

/// ackley, griewank, modulus_sum, rastrigin, salomon, schwefel, rosenbrock, step
std::span<const BenchmarkFunction> benchmark_registry();

/// Throws Error for unknown names.
const BenchmarkFunction& find_benchmark(std::string_view name);

/// Throws Error for unknown names or when x is shorter than the function's
/// minimum dimension (Rosenbrock needs D >= 2).
double eval_benchmark(std::string_view name, const Vector& x);

inline constexpr Index kMinProtocolDim = 2;
inline constexpr Index kMaxProtocolDim = 30;
inline constexpr double kMaxShiftFraction = 0.4;

/// Benchmark on a randomly translated copy of its default box. The tabulated
/// optimum stays strictly inside the box; for corner-optimum functions the
/// reported ground truth is the shifted lower corner.
struct ShiftedProblem {
  const BenchmarkFunction* base = nullptr;
  Index dim = 0;
  SearchSpace space;
  Vector ground_truth;

  double operator()(const Vector& x) const { return (*base)(x); }
};

/// Translates the default box by a per-axis shift drawn uniformly from
/// [-0.4 w, 0.4 w] (w = default width). A draw that would leave the ground
/// truth on or outside the box is rejected and redrawn.
ShiftedProblem make_shifted_problem(const BenchmarkFunction& base, Index dim, RngStream& rng);

/// Explicit per-axis translation; throws Error if a shift exceeds the 40%
/// limit or the ground truth is not strictly inside the result.
ShiftedProblem make_shifted_problem(const BenchmarkFunction& base, const Vector& shift);

/// Problem dimension for one protocol trial, uniform on [2, 30].
Index draw_dimension(RngStream& rng);

/// Euclidean distance between a returned point and the ground truth.
double error_norm(const Vector& returned, const Vector& truth);

}  // namespace kfpso
