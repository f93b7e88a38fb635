#include "bomai/rng.hpp"

#include <stdexcept>

namespace bomai {

namespace {

// SplitMix64 finalizer.
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t CounterRng::bits(const DrawKey& key) const {
  std::uint64_t h = mix(seed_);
  h = mix(h ^ static_cast<std::uint64_t>(key.purpose));
  h = mix(h ^ key.episode);
  h = mix(h ^ key.step);
  return h;
}

double CounterRng::uniform(const DrawKey& key) const {
  return static_cast<double>(bits(key) >> 11) * 0x1.0p-53;
}

CounterRng CounterRng::split(std::uint64_t child) const {
  return CounterRng(mix(mix(seed_) ^ mix(child + 0x632be59bd9b4e019ULL)));
}

bool bernoulli_from_bits(std::uint64_t draw, double p) {
  return static_cast<double>(draw >> 11) * 0x1.0p-53 < p;
}

std::size_t sample_index(const std::vector<Rational>& probs, std::uint64_t draw) {
  if (probs.empty()) throw std::invalid_argument("sample_index: empty distribution");
  mpz_class scaled;
  mpz_import(scaled.get_mpz_t(), 1, 1, sizeof(draw), 0, 0, &draw);
  Rational u(scaled, mpz_class(1) << 64);
  u.canonicalize();
  Rational cumulative = 0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0) continue;
    last_positive = i;
    cumulative += probs[i];
    if (u < cumulative) return i;
  }
  if (cumulative != 1) throw std::invalid_argument("sample_index: probabilities do not sum to 1");
  return last_positive;
}

}  // namespace bomai
