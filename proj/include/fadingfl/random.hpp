#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace fadingfl {

/// Mixes a base seed with a stream label and an index into an independent
/// 64-bit seed (splitmix64 finalizer applied per component).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

/// Labels for the independent streams a replicate draws from.
enum class StreamTag : std::uint64_t {
  partition = 1,
  init = 2,
  selection = 3,
  channel = 4,
  training = 5,
  monte_carlo = 6,
};

/// Seedable random stream built on std::mt19937_64, whose output sequence is
/// fixed by the standard. All transforms to uniform/normal/gamma variates are
/// implemented here so that sequences do not depend on the standard library.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t seed, StreamTag tag, std::uint64_t index = 0)
      : engine_(derive_seed(seed, static_cast<std::uint64_t>(tag), index)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() {
    return (static_cast<double>(engine_() >> 12) + 0.5) * 0x1.0p-52;
  }

  /// Standard normal (Box-Muller, second variate cached).
  double normal();

  /// Gamma(shape, scale = 1), Marsaglia-Tsang.
  double gamma(double shape);

  /// Uniform integer in [0, n), unbiased.
  std::size_t index(std::size_t n);

  /// Uniform integer in [lo, hi].
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + index(hi - lo + 1); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fadingfl
