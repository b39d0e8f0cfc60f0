#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace qdec {

// Deterministic random source (xoshiro256** seeded via splitmix64). All
// conversions are hand-rolled so streams reproduce bit-for-bit across
// toolchains; none of the std distributions are used anywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Named substream of a root seed. Consumers of different names draw from
  // decoupled streams, so adding draws in one phase never perturbs another.
  static Rng substream(std::uint64_t root_seed, std::string_view name);

  std::uint64_t next_u64();

  // Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi);

  // Uniform integer in [0, n); n must be positive.
  std::uint64_t uniform_int(std::uint64_t n);

  bool bernoulli(double p);

  // Index draw proportional to non-negative weights (sum must be positive).
  std::size_t categorical(std::span<const double> weights);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_int(i)]);
    }
  }

 private:
  std::uint64_t s_[4];
};

}  // namespace qdec
