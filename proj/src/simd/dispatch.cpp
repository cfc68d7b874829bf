#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kfpso/simd/kernels.hpp"

namespace kfpso::simd {

namespace {

struct KernelTable {
  void (*swarm_step)(const SwarmStepArgs&);
  void (*weighted_row_sum)(std::span<const double>, std::span<const double>, std::span<double>);
  void (*warp_bilinear_row)(const WarpRowArgs&);
};

constexpr KernelTable kScalarTable{&scalar::swarm_step, &scalar::weighted_row_sum,
                                   &scalar::warp_bilinear_row};
#if defined(KFPSO_HAVE_AVX2)
constexpr KernelTable kAvx2Table{&avx2::swarm_step, &avx2::weighted_row_sum,
                                 &avx2::warp_bilinear_row};
#endif
#if defined(KFPSO_HAVE_NEON)
constexpr KernelTable kNeonTable{&neon::swarm_step, &neon::weighted_row_sum,
                                 &neon::warp_bilinear_row};
#endif

Level probe() {
#if defined(KFPSO_HAVE_AVX2)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2")) return Level::avx2;
#endif
#if defined(KFPSO_HAVE_NEON)
  return Level::neon;
#endif
  return Level::scalar;
}

// KFPSO_SIMD=scalar|avx2|neon pins the level for a whole process.
Level initial_level() {
  const Level detected = detected_level();
  if (const char* env = std::getenv("KFPSO_SIMD")) {
    const std::string want(env);
    for (Level l : {Level::scalar, Level::avx2, Level::neon}) {
      if (want == level_name(l) && level_supported(l)) return l;
    }
  }
  return detected;
}

std::atomic<Level>& current() {
  static std::atomic<Level> level{initial_level()};
  return level;
}

const KernelTable& table() {
  switch (current().load(std::memory_order_relaxed)) {
#if defined(KFPSO_HAVE_AVX2)
    case Level::avx2:
      return kAvx2Table;
#endif
#if defined(KFPSO_HAVE_NEON)
    case Level::neon:
      return kNeonTable;
#endif
    default:
      return kScalarTable;
  }
}

}  // namespace

std::string_view level_name(Level level) {
  switch (level) {
    case Level::scalar:
      return "scalar";
    case Level::avx2:
      return "avx2";
    case Level::neon:
      return "neon";
  }
  return "unknown";
}

Level detected_level() {
  static const Level level = probe();
  return level;
}

Level active_level() { return current().load(std::memory_order_relaxed); }

bool level_supported(Level level) {
  if (level == Level::scalar) return true;
  return level == detected_level();
}

void set_level(Level level) {
  if (!level_supported(level)) {
    throw std::invalid_argument("SIMD level '" + std::string(level_name(level)) +
                                "' is not available on this machine");
  }
  current().store(level, std::memory_order_relaxed);
}

void reset_level() { current().store(detected_level(), std::memory_order_relaxed); }

void swarm_step(const SwarmStepArgs& args) { table().swarm_step(args); }

void weighted_row_sum(std::span<const double> points, std::span<const double> weights,
                      std::span<double> out) {
  table().weighted_row_sum(points, weights, out);
}

void warp_bilinear_row(const WarpRowArgs& args) { table().warp_bilinear_row(args); }

}  // namespace kfpso::simd
