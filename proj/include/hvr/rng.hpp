#pragma once

#include <cstdint>
#include <cmath>
#include <random>
#include <vector>

namespace hvr {

// Seeded random stream. The generator is std::mt19937_64 (its output sequence
// is pinned by the standard); all value transforms are implemented here so the
// stream of uniforms/normals is fully determined by the seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on the open interval (0,1); strictly positive so log(u) is safe.
  double uniform() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n) { return gen_() % n; }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller; two uniforms per draw, no cached state.
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  double normal(double mean, double std) { return mean + std * normal(); }

  // Standard Gumbel(0,1) via inverse CDF.
  double gumbel() { return -std::log(-std::log(uniform())); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Independent child stream; used to give episodes/workers their own streams.
  Rng split(std::uint64_t stream) const {
    std::uint64_t z = seed_ ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return Rng(z ^ (z >> 31));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace hvr
