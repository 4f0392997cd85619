#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace frontierlab::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Purpose tags keep independent stream families from colliding.
enum class StreamTag : std::uint64_t {
  kPath = 1,
  kInit = 2,
  kBatch = 3,
  kEval = 4,
  kStabilization = 5,
  kBetaDraw = 6,
  kPermutation = 7,
  kCorrelation = 8,
};

// Derives a 64-bit stream id from (seed, tag, a, b). Same inputs always give
// the same stream, so path p of a simulation is reproducible regardless of
// how work is sharded across threads.
inline std::uint64_t derive_stream(std::uint64_t seed, StreamTag tag,
                                   std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t s = seed;
  std::uint64_t h = splitmix64(s);
  s ^= static_cast<std::uint64_t>(tag) * 0xda942042e4dd58b5ULL;
  h ^= splitmix64(s);
  s ^= a * 0xca01f9dd51b143dfULL + 0x2545f4914f6cdd1dULL;
  h ^= splitmix64(s);
  s ^= b * 0x9e6c63d0876a9a35ULL + 0xbdd894d7f27cf5e7ULL;
  h ^= splitmix64(s);
  return h;
}

// xoshiro256++ with splitmix64 seeding. Normal variates via Box-Muller with a
// cached spare, so the draw sequence is a pure function of the stream id.
class Stream {
 public:
  explicit Stream(std::uint64_t stream_id) {
    std::uint64_t s = stream_id;
    for (auto& word : state_) word = splitmix64(s);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on the open interval (0,1); never returns an exact endpoint.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection-free would bias for huge n; n here is tiny (permutations).
    return next_u64() % n;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace frontierlab::rng
