#pragma once

// Reproducible randomness. Every experiment is a pure function of a 64-bit
// seed: a counter-based Philox4x32-10 generator is keyed by the seed and the
// upper half of its counter selects an independent stream, so parallel
// workers can each own a disjoint stream without coordination.

#include <array>
#include <cstdint>
#include <limits>
#include <random>

#include "nlbit/core.hpp"

namespace nlbit {

/// Philox4x32-10 (Salmon et al., Random123) as a UniformRandomBitGenerator.
class PhiloxStream {
 public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  PhiloxStream(std::uint64_t seed, std::uint64_t stream_id)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_id_(stream_id) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (next_ == 4) {
      buffer_ = bijection({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                           static_cast<std::uint32_t>(stream_id_),
                           static_cast<std::uint32_t>(stream_id_ >> 32)},
                          key_);
      ++block_;
      next_ = 0;
    }
    return buffer_[next_++];
  }

  std::uint64_t stream_id() const { return stream_id_; }

  /// The raw keyed bijection on 128-bit counters.
  static constexpr Block bijection(Block ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  Key key_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  Block buffer_{};
  int next_ = 4;
};

/// Derives an independent 64-bit seed for a labelled sub-experiment
/// (SplitMix64 finalizer over seed and tag).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

template <class Rng>
Bit uniform_bit(Rng& rng) {
  return Bit(static_cast<unsigned>(rng() & 1u));
}

/// Uniform direction on S^2: a normalized vector of three standard Gaussians.
/// Draws with norm below 1e-12 are rejected and redrawn.
template <class Rng>
UnitVector3 sample_uniform_sphere(Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (;;) {
    const Vec3 v{gauss(rng), gauss(rng), gauss(rng)};
    if (norm(v) >= 1e-12) return UnitVector3::normalized(v);
  }
}

/// The hidden variables Alice and Bob agree on before separating.
struct SharedRandomness {
  UnitVector3 lambda1;
  UnitVector3 lambda2;
  std::uint64_t seed = 0;  // provenance only

  DerivedVectorPair derived() const { return DerivedVectorPair::from(lambda1, lambda2); }

  template <class Rng>
  static SharedRandomness draw(Rng& rng, std::uint64_t seed) {
    auto l1 = sample_uniform_sphere(rng);
    auto l2 = sample_uniform_sphere(rng);
    return {l1, l2, seed};
  }
};

}  // namespace nlbit
