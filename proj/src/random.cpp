#include "alignpxtr/random.hpp"

#include <cmath>
#include <stdexcept>

#include "alignpxtr/special.hpp"

namespace alignpxtr {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::uniform_open() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

double Rng::normal() { return normal_quantile(uniform_open()); }

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::below: empty range");
  // Reject the incomplete top block so every residue is equally likely.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t r = next();
  while (r >= limit) r = next();
  return r % n;
}

std::size_t Rng::categorical(std::span<const double> probabilities) {
  const double u = uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    acc += probabilities[i];
    if (u < acc) return i;
  }
  // Rounding left u above the running total; take the last positive entry.
  for (std::size_t i = probabilities.size(); i > 0; --i) {
    if (probabilities[i - 1] > 0.0) return i - 1;
  }
  throw std::invalid_argument("Rng::categorical: no positive probability");
}

}  // namespace alignpxtr
