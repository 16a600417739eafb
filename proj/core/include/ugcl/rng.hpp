#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace ugcl {

/// xoshiro256** seeded through splitmix64.
///
/// Every sampling routine in the library draws from this generator through
/// the helpers below, never through <random> distributions, whose output is
/// implementation-defined. Given the same seed the stream is identical on
/// every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent stream for a named purpose ("mask", "split", ...).
  static Rng derive(std::uint64_t seed, std::string_view stream);

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform();

  /// Uniform integer in [0, bound). `bound` must be positive.
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal via Box-Muller (no cached second variate).
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::array<std::uint64_t, 4> s_{};
};

std::uint64_t splitmix64(std::uint64_t& state);

/// FNV-1a, 64-bit. Used for stream names and config digests.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace ugcl
