#ifndef CHAINFLOW_RNG_HPP
#define CHAINFLOW_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

#include "chainflow/hash.hpp"

namespace chainflow {

/// Derives an independent 64-bit seed for a named stream, so adding a new
/// consumer of randomness never perturbs existing ones.
inline std::uint64_t substream_seed(std::uint64_t master, std::string_view name) {
  ByteWriter w;
  w.str("chainflow-substream").u64(master).str(name);
  auto d = sha256(w.bytes());
  std::uint64_t seed = 0;
  for (int i = 0; i < 8; ++i) seed = (seed << 8) | d.bytes()[static_cast<std::size_t>(i)];
  return seed;
}

/// mt19937_64 with portable bounded draws (the standard distributions are
/// not bit-identical across standard library implementations).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t master, std::string_view stream) : engine_(substream_seed(master, stream)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound). bound must be non-zero.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  /// Uniform double in [0, 1) with 53 bits of precision.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  template <typename Container>
  void shuffle(Container& c) {
    for (std::size_t i = c.size(); i > 1; --i) {
      auto j = static_cast<std::size_t>(below(i));
      std::swap(c[i - 1], c[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace chainflow

#endif  // CHAINFLOW_RNG_HPP
