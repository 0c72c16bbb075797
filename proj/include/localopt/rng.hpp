#pragma once

#include <cmath>
#include <cstdint>

namespace localopt {

// Finalizer from the splitmix64 generator. Bijective on 64-bit words, good
// avalanche behaviour, and cheap enough to call once per sample.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic pseudo-random stream addressed by an explicit key instead of
// shared mutable state. Two streams built from the same key produce the same
// samples on every platform, and distinct keys give statistically independent
// streams, so simulation code can hand each (node, round) pair its own stream
// and stay reproducible no matter how work is scheduled.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : state_(key) {}

  // Derives a stream key from a user seed plus up to three coordinates
  // (for example node, round, purpose tag). Chained mixing keeps nearby
  // coordinates from producing correlated streams.
  static RngStream keyed(std::uint64_t seed, std::uint64_t a = 0,
                         std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t k = mix64(seed ^ 0x6c6f63616c6f7074ULL);
    k = mix64(k ^ a);
    k = mix64(k ^ b);
    k = mix64(k ^ c);
    return RngStream(k);
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on (0, 1]. The +1 keeps log() in the normal sampler finite.
  double uniform() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller. std::normal_distribution is
  // implementation-defined, which would break cross-platform determinism.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Purpose tags keep streams for unrelated uses (matrix entries, optima,
// gradient noise, ...) disjoint even when seed and coordinates coincide.
namespace rng_tag {
inline constexpr std::uint64_t kMatrix = 1;
inline constexpr std::uint64_t kOptimum = 2;
inline constexpr std::uint64_t kNoise = 3;
inline constexpr std::uint64_t kPowerIter = 4;
inline constexpr std::uint64_t kInit = 5;
}  // namespace rng_tag

}  // namespace localopt
