#pragma once

// Counter-based random numbers: a draw is a pure function of
// (seed, purpose, episode, step), so replicas and replays never depend on
// how many draws happened before.

#include <cstdint>
#include <vector>

#include "bomai/rational.hpp"

namespace bomai {

enum class DrawPurpose : std::uint32_t { exploration = 1, mentor = 2, percept = 3, test = 99 };

struct DrawKey {
  DrawPurpose purpose = DrawPurpose::test;
  std::uint64_t episode = 0;
  std::uint64_t step = 0;

  bool operator==(const DrawKey&) const = default;
};

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// 64 uniformly distributed bits.
  std::uint64_t bits(const DrawKey& key) const;

  /// Uniform double in [0, 1) with 53 bits of resolution.
  double uniform(const DrawKey& key) const;

  /// Derives an independent generator, e.g. one per replica.
  CounterRng split(std::uint64_t child) const;

 private:
  std::uint64_t seed_;
};

/// Bernoulli(p) outcome for a raw draw: true iff draw/2^64 < p, where the
/// comparison uses the top 53 bits so that p = 1 always succeeds.
bool bernoulli_from_bits(std::uint64_t draw, double p);

/// Index i with sum(probs[0..i)) <= draw/2^64 < sum(probs[0..i]), compared
/// exactly. probs must be non-negative and sum to 1.
std::size_t sample_index(const std::vector<Rational>& probs, std::uint64_t draw);

}  // namespace bomai
