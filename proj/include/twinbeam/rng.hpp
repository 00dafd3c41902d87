#pragma once

#include <cstdint>
#include <random>
#include <utility>

namespace twinbeam {

/// Seeded generator with a fully specified output sequence: mt19937_64 bits,
/// 53-bit uniforms on (0, 1) and Box-Muller normal pairs. Distribution code
/// from the standard library is avoided because its output is
/// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform() {
    constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
    return (static_cast<double>(engine_() >> 11) + 0.5) * kScale;
  }

  /// Two independent standard normal deviates.
  std::pair<double, double> normal_pair();

 private:
  std::mt19937_64 engine_;
};

/// Seed for sub-stream `stream` of `base` (SplitMix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace twinbeam
