#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace kfpso {

/// Seeded random stream keyed by (master_seed, stream_id).
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard, and all derived draws (uniform reals, bounded integers) are
/// computed here rather than through std:: distributions, whose algorithms
/// are implementation-defined. Identical keys therefore give identical
/// sequences on every conforming platform.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [lo, hi] (inclusive), unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  void fill_uniform(std::span<double> out);

  /// Child stream that depends only on this stream's key and `tag`, not on
  /// how many values have been drawn so far.
  RngStream fork(std::uint64_t tag) const;

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to decorrelate seeds.
std::uint64_t mix64(std::uint64_t x);

}  // namespace kfpso
