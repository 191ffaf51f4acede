// Copyright 2026. MIT license.
#pragma once

#include <cstdint>
#include <cmath>
#include <numbers>

namespace ndgd {

// SplitMix64: counter-based 64-bit generator. Cheap to seed, trivially
// splittable into independent streams, which is what the per-trial and
// per-run reproducibility contract needs.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~0ull; }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Derive an independent stream for (seed, index) without sharing state.
  static Rng stream(std::uint64_t seed, std::uint64_t index) {
    Rng mixer(seed ^ (0x9e3779b97f4a7c15ull * (index + 1)));
    return Rng(mixer() ^ index);
  }

  std::uint64_t state() const { return state_; }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller, no spare caching: two uniforms per normal keeps the draw
  // count predictable across call sites.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t integer(std::uint64_t bound) {  // uniform on [0, bound)
    return (*this)() % bound;
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t fnv1a(const void* data, std::size_t len,
                           std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace ndgd
