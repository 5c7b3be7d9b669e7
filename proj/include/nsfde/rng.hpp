#pragma once

#include <cmath>
#include <cstdint>

namespace nsfde::rng {

// SplitMix64 output function. Counter-based: draw i of a stream is a pure
// function of (key, i), so streams can be replayed or parallelized freely.
inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

/// Stream id for (path, mode) substreams. Paths and modes at desk scale
/// stay far below the packing limits (2^44 paths, 2^20 modes).
inline std::uint64_t substream(std::uint64_t path, std::uint64_t mode = 0) {
  return (path << 20) + mode;
}

/// One named counter-based Gaussian/uniform stream. A path sampled from
/// stream (seed, substream(p, m)) is bitwise identical no matter how many
/// other paths are drawn or in which order.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream)
      : key_(mix64(mix64(seed + kGolden) ^ mix64(stream + 2 * kGolden))) {}

  std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGolden); }

  /// Uniform on the open interval (0, 1).
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  /// Standard normal via Box-Muller; consumes exactly two uniforms per pair.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace nsfde::rng
