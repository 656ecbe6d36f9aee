#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace alignpxtr {

/// SplitMix64 finalizer used to derive independent stream seeds from a
/// master seed. `derive_seed(s, k)` is stable across platforms.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Seeded generator with platform-independent variate conversions.
///
/// The standard distribution adaptors are implementation-defined, so all
/// conversions from raw 64-bit draws are done here to keep generated data
/// byte-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on the open interval (0, 1).
  double uniform_open();
  double normal();
  /// Uniform integer in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n);
  /// Index drawn from a discrete probability vector.
  std::size_t categorical(std::span<const double> probabilities);

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace alignpxtr
