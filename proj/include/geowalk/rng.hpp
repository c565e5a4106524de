#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace geowalk {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Single-owner random stream. Streams for parallel chains are derived
/// from (seed, stream_id) via `split`, never shared between threads.
///
/// Normals are produced by Box-Muller with no cached second variate, so
/// every call to `normal()` consumes exactly two engine outputs and every
/// call to `uniform()` exactly one. Draw counts are therefore a pure
/// function of the call sequence.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  static RngStream split(std::uint64_t seed, std::uint64_t stream_id) {
    return RngStream(splitmix64(seed) ^ splitmix64(~stream_id + 0x632be59bd9b4e019ULL));
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    // 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace geowalk
