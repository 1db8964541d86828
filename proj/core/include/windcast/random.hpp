#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace windcast {

using Rng = std::mt19937_64;

// Unbiased integer in [0, bound) via rejection; avoids the
// implementation-defined mapping of std::uniform_int_distribution so that
// sampled anchor sets are reproducible from the seed alone.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_below: bound must be positive");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return draw % bound;
}

// Draws p distinct indices from [0, n) uniformly, in sampling order
// (partial Fisher-Yates over an index table).
inline std::vector<std::ptrdiff_t> sample_without_replacement(std::ptrdiff_t n, std::ptrdiff_t p, Rng& rng) {
  if (n < 0 || p < 0 || p > n) throw std::invalid_argument("sample_without_replacement: need 0 <= p <= n");
  std::vector<std::ptrdiff_t> pool(static_cast<std::size_t>(n));
  for (std::ptrdiff_t i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  std::vector<std::ptrdiff_t> out(static_cast<std::size_t>(p));
  for (std::ptrdiff_t i = 0; i < p; ++i) {
    const auto j = i + static_cast<std::ptrdiff_t>(uniform_below(rng, static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    out[static_cast<std::size_t>(i)] = pool[static_cast<std::size_t>(i)];
  }
  return out;
}

}  // namespace windcast
