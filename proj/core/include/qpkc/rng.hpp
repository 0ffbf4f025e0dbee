// Seeded random source shared by all simulation code.
//
// Every sampling decision flows through an explicitly seeded Rng, so a run
// is reproducible bit for bit from its seed.  Raw draws come from
// std::mt19937_64, whose output sequence the standard pins down exactly;
// the scalers below replace std::uniform_*_distribution, whose mappings are
// implementation-defined.
#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qpkc {

// One SplitMix64 step; used to spread seeds before they reach an engine.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed for the `stream`-th independent stream derived from a base seed.
// Used to decorrelate parallel trials: (seed, trial index) -> stream seed.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t state = seed;
  std::uint64_t mixed = splitmix64(state);
  state = mixed ^ (stream + 0x9e3779b97f4a7c15ULL);
  return splitmix64(state);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng for_stream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(stream_seed(seed, stream));
  }

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double probability) { return uniform() < probability; }

  int bit() { return static_cast<int>(next() >> 63); }

  // Unbiased integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) {
      throw std::invalid_argument("Rng::below: bound must be positive");
    }
    std::uint64_t draw = 0;
    std::uint64_t value = 0;
    do {
      draw = next();
      value = draw % bound;
    } while (draw - value > std::uint64_t{0} - bound);
    return value;
  }

 private:
  std::mt19937_64 engine_;
};

// Fisher-Yates shuffle driven by Rng::below, so the permutation depends only
// on the seed (std::shuffle's mapping is implementation-defined).
template <typename T>
void shuffle(std::vector<T>& values, Rng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace qpkc
