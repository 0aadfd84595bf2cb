#pragma once

#include <cstdint>

namespace masksearch {

/// Seed expander: state += 0x9E3779B97F4A7C15, then the splitmix64 finalizer.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// xorshift64* generator. The initial state is splitmix64(seed) (zero is
/// replaced by the splitmix increment). Each step: x ^= x >> 12; x ^= x << 25;
/// x ^= x >> 27; output x * 0x2545F4914F6CDD1D. This sequence is part of the
/// on-disk contract for augmentation and must not change.
class Xorshift64Star {
 public:
  explicit Xorshift64Star(std::uint64_t seed) {
    std::uint64_t s = seed;
    state_ = splitmix64(s);
    if (state_ == 0) state_ = 0x9E3779B97F4A7C15ULL;
  }

  std::uint64_t next() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1DULL;
  }

  /// Top byte of the next output.
  std::uint8_t next_byte() { return static_cast<std::uint8_t>(next() >> 56); }

  /// Uniform double in [0, 1) from the top 53 bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace masksearch
