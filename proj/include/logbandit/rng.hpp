#pragma once

#include <cstdint>

#include "logbandit/glm.hpp"

namespace logbandit {

/// What a random stream is used for. Each (seed, purpose) pair owns an
/// independent stream so extra draws for one purpose never shift another.
enum class StreamPurpose : std::uint64_t {
  kArms = 1,
  kRewards = 2,
  kAgent = 3,
  kLemma = 4,
  kKappa = 5,
  kInstance = 6,
};

/// Counter-based generator: draw i of round r in stream (seed, purpose) is a
/// fixed hash of (seed, purpose, r, i), so samples are reproducible without
/// replaying earlier rounds.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, StreamPurpose purpose, std::uint64_t round = 0);

  /// Moves to another round and resets the draw counter.
  void seek(std::uint64_t round);

  std::uint64_t round() const { return round_; }
  std::uint64_t draws() const { return counter_; }

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal by Box-Muller; consumes two draws.
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t seed_;
  std::uint64_t purpose_;
  std::uint64_t round_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Uniform draw from the d-dimensional unit ball: Gaussian direction times
/// U^{1/d}.
Vector uniform_in_ball(int d, CounterRng& rng);

/// Uniform draw from the unit sphere.
Vector uniform_on_sphere(int d, CounterRng& rng);

}  // namespace logbandit
