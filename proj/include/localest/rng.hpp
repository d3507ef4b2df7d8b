#pragma once

#include <cstdint>
#include <limits>

namespace localest {

/// Stafford variant-13 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// SplitMix64 generator; satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state) noexcept : state_(state) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

 private:
  std::uint64_t state_;
};

/// Independent stream seed for (master, replicate, stream tag).
///
/// The pair is packed injectively into one word (replicate below 2^48, tag
/// below 2^16) and passed through two rounds of the bijective finalizer
/// keyed by the master seed, so distinct pairs never collide for a fixed
/// master seed.
std::uint64_t seed_derivation(std::uint64_t master_seed, std::uint64_t replicate_id,
                              std::uint16_t stream_tag);

/// Counter-keyed stream: the generator for step `counter` of a run seeded by `seed`.
inline SplitMix64 counter_stream(std::uint64_t seed, std::uint64_t counter) noexcept {
  return SplitMix64(mix64(seed ^ mix64(counter + 0x632be59bd9b4e019ULL)));
}

}  // namespace localest
