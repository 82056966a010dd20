#pragma once

#include <cmath>
#include <cstdint>

namespace ascertain {

// SplitMix64: 64-bit counter-based generator. Streams for distinct
// (seed, replication, participant) triples are derived by chaining the
// finalizer, so any participant's draw sequence is independent of scheduling
// and thread count.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0,1), 53-bit resolution.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Exponential with the given rate; +infinity when rate == 0.
  double next_exponential(double rate) {
    if (rate <= 0.0) return INFINITY;
    return -std::log1p(-next_double()) / rate;
  }

  bool next_bernoulli(double p) { return next_double() < p; }

 private:
  std::uint64_t state_;
};

// Stream for one participant in one replication.
inline SplitMix64 participant_stream(std::uint64_t seed, std::uint64_t replication,
                                     std::uint64_t participant) {
  std::uint64_t s = SplitMix64::mix(seed);
  s = SplitMix64::mix(s ^ (0x1000000000000001ULL * (replication + 1)));
  s = SplitMix64::mix(s ^ (0x2000000000000003ULL * (participant + 1)));
  return SplitMix64(s);
}

}  // namespace ascertain
