#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace redris {

namespace detail {

// SplitMix64 step; used to fold substream tags into a seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/**
 * @brief Deterministic random source with portable draw functions.
 *
 * All distributions are implemented on top of raw engine output so the
 * generated streams do not depend on standard-library internals.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /** @brief Derives an independent generator from a seed and a tag list. */
  static Rng substream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t state = seed;
    std::uint64_t folded = detail::splitmix64(state);
    for (std::uint64_t t : tags) {
      state ^= t * 0x9e3779b97f4a7c15ULL;
      folded ^= detail::splitmix64(state);
    }
    return Rng(folded);
  }

  std::uint64_t raw() { return eng_(); }

  /** @brief Uniform double in [0, 1). */
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  /** @brief Uniform double in [lo, hi). */
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /** @brief Uniform integer in [0, n). Rejection sampling, no modulo bias. */
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng - uniform_int: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = eng_();
    while (x >= limit) x = eng_();
    return x % n;
  }

  /** @brief Standard normal draw via Box-Muller. */
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /** @brief Circularly symmetric complex normal CN(0, 1). */
  std::complex<double> cnormal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-std::log(u1));  // folds in the 1/sqrt(2) variance split
    return {r * std::cos(2.0 * std::numbers::pi * u2), r * std::sin(2.0 * std::numbers::pi * u2)};
  }

  /** @brief In-place Fisher-Yates shuffle. */
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_int(i)]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace redris
