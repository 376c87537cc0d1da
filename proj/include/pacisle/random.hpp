#pragma once

#include <cstdint>
#include <random>

namespace pacisle {

// mt19937_64 output is fixed by the standard; the distributions in <random>
// are not, so bounded draws go through uniform_below to keep seeded runs
// byte-identical across standard libraries.
using Rng = std::mt19937_64;

inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  if (bound <= 1) return 0;
  const std::uint64_t limit = Rng::max() - (Rng::max() % bound + 1) % bound;
  for (;;) {
    const std::uint64_t x = rng();
    if (x <= limit) return x % bound;
  }
}

}  // namespace pacisle
