#pragma once

// Data-parallel inner loops shared by the optimizers and the registration
// similarity measures. Every kernel has a scalar reference implementation
// and vector variants selected at runtime. Vector variants use the same
// operation order as the scalar code (no fused multiply-add), so all
// variants produce bit-identical results.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace kfpso::simd {

enum class Level { scalar, avx2, neon };

std::string_view level_name(Level level);

/// Best level supported by the running CPU and compiled into this build.
Level detected_level();

/// Level used by the dispatching entry points below.
Level active_level();

bool level_supported(Level level);

/// Forces a dispatch level. Throws std::invalid_argument when the level is
/// not available on this machine.
void set_level(Level level);

/// Restores the detected level.
void reset_level();

/// One fused velocity + position update for a K x D particle block stored
/// row-major:
///   v <- w*v + cp*rp*(pbest - x) + cg*rg*(gbest - x) + ct*rt*(theta - x)
///   x <- clamp(x + v, lower, upper), v <- 0 on axes where the clamp was active
struct SwarmStepArgs {
  std::span<double> positions;
  std::span<double> velocities;
  std::span<const double> personal_best;
  std::span<const double> global_best;  // D
  std::span<const double> theta;        // D
  std::span<const double> r_personal;   // K x D
  std::span<const double> r_global;     // K x D
  std::span<const double> r_theta;      // K x D
  std::span<const double> lower;        // D
  std::span<const double> upper;        // D
  double inertia = 0.0;
  double c_personal = 0.0;
  double c_global = 0.0;
  double c_theta = 0.0;
};

void swarm_step(const SwarmStepArgs& args);

/// out[d] = sum_i weights[i] * points[i*D + d], accumulated in particle order.
void weighted_row_sum(std::span<const double> points, std::span<const double> weights,
                      std::span<double> out);

/// Bilinear samples of `image` (row-major, width x height, width,height >= 2)
/// along the line u = u0 + j*du, v = v0 + j*dv for j in [0, out.size()).
/// Samples with (u, v) outside [0, width-1] x [0, height-1] get value 0 and
/// valid = 0.
struct WarpRowArgs {
  std::span<const double> image;
  std::size_t width = 0;
  std::size_t height = 0;
  double u0 = 0.0;
  double v0 = 0.0;
  double du = 0.0;
  double dv = 0.0;
  std::span<double> out;
  std::span<std::uint8_t> valid;
};

void warp_bilinear_row(const WarpRowArgs& args);

// Per-level entry points. Exposed for equivalence testing.
namespace scalar {
void swarm_step(const SwarmStepArgs& args);
void weighted_row_sum(std::span<const double> points, std::span<const double> weights,
                      std::span<double> out);
void warp_bilinear_row(const WarpRowArgs& args);
}  // namespace scalar

namespace avx2 {
void swarm_step(const SwarmStepArgs& args);
void weighted_row_sum(std::span<const double> points, std::span<const double> weights,
                      std::span<double> out);
void warp_bilinear_row(const WarpRowArgs& args);
}  // namespace avx2

namespace neon {
void swarm_step(const SwarmStepArgs& args);
void weighted_row_sum(std::span<const double> points, std::span<const double> weights,
                      std::span<double> out);
void warp_bilinear_row(const WarpRowArgs& args);
}  // namespace neon

}  // namespace kfpso::simd
