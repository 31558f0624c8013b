#pragma once

#include <cstdint>
#include <limits>

namespace d2le {

/// SplitMix64. Fully specified bit stream, so every platform draws the same
/// coins for the same seed (std distributions are implementation-defined).
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  constexpr explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_{seed} {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  constexpr std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

/// Counter-based seed split. The result depends only on the arguments, never
/// on how many other streams were derived before.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a) noexcept {
  return SplitMix64::mix(SplitMix64::mix(seed ^ 0x6A09E667F3BCC909ULL) + a * 0x9E3779B97F4A7C15ULL +
                         0xD1B54A32D192ED03ULL);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
  return derive_seed(derive_seed(seed, a), b);
}

/// Uniform double in [0, 1) with 53 random bits.
template <class Rng>
double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, bound), bound > 0. Lemire's multiply-shift with
/// rejection; exact and portable.
template <class Rng>
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  unsigned __int128 product = static_cast<unsigned __int128>(rng()) * bound;
  auto low = static_cast<std::uint64_t>(product);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      product = static_cast<unsigned __int128>(rng()) * bound;
      low = static_cast<std::uint64_t>(product);
    }
  }
  return static_cast<std::uint64_t>(product >> 64);
}

/// Seed of one election trial. Node streams are split from (base, trial, node).
struct TrialSeed {
  std::uint64_t base = 0;
  std::uint64_t trial = 0;

  SplitMix64 node_stream(std::uint64_t node) const noexcept {
    return SplitMix64{derive_seed(base, trial, node)};
  }
  /// Stream reserved for per-trial choices that are not node coins (id draws).
  SplitMix64 aux_stream(std::uint64_t tag) const noexcept {
    return SplitMix64{derive_seed(derive_seed(base, ~trial), tag)};
  }

  friend bool operator==(const TrialSeed&, const TrialSeed&) = default;
};

}  // namespace d2le
