#pragma once

#include <cstdint>

namespace bnsl {

// SplitMix64: one 64-bit state word advanced by the golden-ratio increment,
// finalized with two xor-multiply rounds. Fixed constants, so the stream is
// bit-identical on every platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) built from the top 53 bits of next().
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// The SplitMix64 finalizer alone; used to hash seeds and indices together.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Deterministic per-cell seed for experiment grids: hash the master seed with
// up to three coordinates (e.g. sample size, repetition, mode index).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
  std::uint64_t s = mix64(master + kGolden);
  s = mix64(s ^ (a + kGolden));
  s = mix64(s ^ (b + kGolden));
  s = mix64(s ^ (c + kGolden));
  return s;
}

}  // namespace bnsl
