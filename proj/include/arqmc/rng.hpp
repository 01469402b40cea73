#pragma once

#include <cstdint>

namespace arqmc {

// Counter-based uniform variates: every draw is a pure function of
// (seed, stream, index), so generation order never changes the output.

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix_key(std::uint64_t seed, std::uint64_t a,
                                std::uint64_t b = 0) noexcept {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

/// Uniform double in [0,1) with 53 random bits.
constexpr double counter_uniform(std::uint64_t seed, std::uint64_t index,
                                 std::uint64_t coord) noexcept {
  return static_cast<double>(mix_key(seed, index, coord) >> 11) * 0x1.0p-53;
}

/// Small sequential generator built on the same hash, for test-style loops.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}
  double uniform() noexcept { return counter_uniform(seed_, counter_++, 0x5eed); }
  std::uint64_t next_u64() noexcept { return mix_key(seed_, counter_++, 0xfeed); }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace arqmc
