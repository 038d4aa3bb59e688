#ifndef KH_RNG_HPP
#define KH_RNG_HPP

#include <cstdint>
#include <limits>

namespace kh {

/// SplitMix64 (Steele, Lea & Flood 2014): a 64-bit counter-based generator.
///
/// The k-th output is mix(seed + k * 0x9E3779B97F4A7C15), so the stream is
/// fully determined by the seed and the position, independent of platform or
/// standard library. All derived draws (uniform doubles, bounded integers,
/// Bernoulli, normals) use fixed algorithms documented below so that synthetic
/// data and stochastic runs are bit-reproducible across implementations.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    state_ += kGamma;
    return mix(state_);
  }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Top 53 bits scaled by 2^-53; result in [0, 1).
  double uniform01() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  /// Unbiased integer in [0, bound) via Lemire's multiply-shift with rejection.
  std::uint64_t uniform_below(std::uint64_t bound) noexcept;

  /// True with probability p (uniform01() < p); always consumes one draw.
  bool bernoulli(double p) noexcept { return uniform01() < p; }

  /// Standard normal by the Box-Muller transform; consumes two draws per call.
  double normal() noexcept;

  std::uint64_t state() const noexcept { return state_; }
  void set_state(std::uint64_t s) noexcept { state_ = s; }

  friend bool operator==(const SplitMix64&, const SplitMix64&) = default;

 private:
  std::uint64_t state_;
};

/// Derives an independent stream seed from a base seed and a stream id.
constexpr std::uint64_t derive_seed(std::uint64_t base,
                                    std::uint64_t stream) noexcept {
  return SplitMix64::mix(base ^ SplitMix64::mix(stream + SplitMix64::kGamma));
}

}  // namespace kh

#endif  // KH_RNG_HPP
