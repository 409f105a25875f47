#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace infotree {

namespace detail {

// SplitMix64 finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace detail

/// Purpose tags for derived streams. Values are part of the reproducibility
/// contract: changing one changes every downstream variate.
enum class StreamTag : std::uint16_t {
  generic = 0,
  model = 1,
  sample = 2,
  shuffle = 3,
  subset = 4,
  cross_validation = 5,
  learning_curve = 6,
  entropy_sweep = 7,
  tree_sweep = 8,
  mi_sweep = 9,
  tan_compare = 10,
};

/// Counter-based 64-bit generator.
///
/// The i-th output is a pure function of (key, stream, i):
///
///     out(i) = mix64(mix64(key ^ mix64(stream + golden)) + (i + 1) * golden)
///
/// where mix64 is the SplitMix64 finalizer. Because there is no hidden state
/// beyond the counter, a generator can be copied, rewound (`set_counter`), or
/// re-derived anywhere and yields the same variates.
///
/// Satisfies std::uniform_random_bit_generator, but the library draws all of
/// its variates through the member helpers below so results do not depend on
/// the standard library's distribution implementations.
class SeededGenerator {
 public:
  using result_type = std::uint64_t;

  constexpr SeededGenerator() noexcept : SeededGenerator(0, 0) {}
  constexpr explicit SeededGenerator(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : key_(seed), stream_(stream) {
    base_ = detail::mix64(key_ ^ detail::mix64(stream_ + detail::kGolden));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    ++counter_;
    return detail::mix64(base_ + counter_ * detail::kGolden);
  }

  /// Uniform on the open interval (0, 1), 53 bits of resolution.
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound). Lemire's nearly-divisionless rejection.
  std::uint64_t uniform_below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform_below: bound must be positive");
    auto x = (*this)();
    auto m = static_cast<unsigned __int128>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        x = (*this)();
        m = static_cast<unsigned __int128>(x) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Beta(1/2, 1/2) (arcsine law) variate: sin^2(pi U / 2).
  double arcsine() noexcept {
    const double s = std::sin(0.5 * std::numbers::pi * uniform());
    return s * s;
  }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    shuffle(std::span<T>(items));
  }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t stream() const noexcept { return stream_; }
  constexpr std::uint64_t counter() const noexcept { return counter_; }
  constexpr void set_counter(std::uint64_t c) noexcept { counter_ = c; }

  friend constexpr bool operator==(const SeededGenerator&, const SeededGenerator&) = default;

 private:
  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t base_ = 0;
  std::uint64_t counter_ = 0;
};

/// Child stream for (trial, tag).
///
/// The parent's identity (key and stream) is folded into the child's key and
/// the child's stream is `trial << 16 | tag`, so for a fixed parent the map
/// (trial, tag) -> child is injective as long as trial < 2^48. The parent's
/// counter is ignored: derivation does not depend on how many variates the
/// parent has already produced.
inline SeededGenerator derive_stream(const SeededGenerator& parent, std::uint64_t trial,
                                     StreamTag tag = StreamTag::generic) {
  if (trial >= (std::uint64_t{1} << 48)) {
    throw std::invalid_argument("derive_stream: trial index must be below 2^48");
  }
  const std::uint64_t child_key =
      detail::mix64(parent.key() + detail::kGolden) ^ detail::mix64(parent.stream() ^ 0x5851f42d4c957f2dULL);
  return SeededGenerator(child_key, (trial << 16) | static_cast<std::uint64_t>(tag));
}

/// Categorical sampler over a fixed probability vector (cumulative table plus
/// binary search). Weights need not be normalized.
class CategoricalSampler {
 public:
  CategoricalSampler() = default;
  explicit CategoricalSampler(std::span<const double> weights) : cumulative_(weights.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
        throw std::invalid_argument("CategoricalSampler: weights must be finite and non-negative");
      }
      acc += weights[i];
      cumulative_[i] = acc;
    }
    if (!(acc > 0.0)) throw std::invalid_argument("CategoricalSampler: total weight must be positive");
  }

  std::size_t operator()(SeededGenerator& gen) const {
    const double u = gen.uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    auto idx = static_cast<std::size_t>(it - cumulative_.begin());
    if (idx >= cumulative_.size()) idx = cumulative_.size() - 1;
    // Skip zero-weight categories that share a cumulative value with their predecessor.
    while (idx > 0 && cumulative_[idx] == cumulative_[idx - 1] && u >= cumulative_[idx - 1]) --idx;
    return idx;
  }

  std::size_t size() const noexcept { return cumulative_.size(); }

 private:
  std::vector<double> cumulative_;
};

}  // namespace infotree
