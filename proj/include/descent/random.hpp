#pragma once

// Counter-derived random streams and exact-probability thresholds.
//
// A probability P is turned into the integer floor(P * 2^64) once, and a
// uniform 64-bit draw u selects the event iff u < threshold. Per-decision bias
// is below 2^-64 and no rational arithmetic happens in the sampling loop.

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "descent/types.hpp"

namespace descent {

using Threshold = unsigned __int128;

inline constexpr Threshold kThresholdOne = Threshold{1} << 64;

inline constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// SplitMix64; satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state = 0) noexcept : state_(state) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return splitmix64_mix(state_);
  }

 private:
  std::uint64_t state_;
};

/// Independent stream for one replicate. Depends only on the pair
/// (master_seed, replicate), so a replicate draws the same numbers whichever
/// thread runs it.
inline SplitMix64 replicate_stream(std::uint64_t master_seed, std::uint64_t replicate) noexcept {
  return SplitMix64(splitmix64_mix(master_seed ^ splitmix64_mix(replicate + 0x632be59bd9b4e019ULL)));
}

/// floor(p * 2^64) for an exact probability p in [0, 1].
inline Threshold probability_threshold(const Rational& p) {
  if (sgn(p) < 0 || p > 1)
    throw invalid_rule_error("probability " + p.get_str() + " is outside [0, 1]");
  if (p == 1) return kThresholdOne;
  Integer scaled;
  mpz_mul_2exp(scaled.get_mpz_t(), p.get_num_mpz_t(), 64);
  mpz_fdiv_q(scaled.get_mpz_t(), scaled.get_mpz_t(), p.get_den_mpz_t());
  static_assert(sizeof(unsigned long) == 8, "thresholds assume a 64-bit unsigned long");
  return Threshold{mpz_get_ui(scaled.get_mpz_t())};
}

/// Cumulative thresholds for a finite categorical law. The last entry is
/// forced to 2^64 so every draw lands somewhere.
class CategoricalTable {
 public:
  CategoricalTable() = default;

  explicit CategoricalTable(std::span<const Rational> probs) {
    if (probs.empty()) throw invalid_rule_error("categorical law with no outcomes");
    Rational running = 0;
    cumulative_.reserve(probs.size());
    for (const auto& p : probs) {
      if (sgn(p) < 0) throw invalid_rule_error("negative probability " + p.get_str());
      running += p;
      cumulative_.push_back(probability_threshold(running > 1 ? Rational(1) : running));
    }
    if (running != 1)
      throw invalid_rule_error("categorical probabilities sum to " + running.get_str());
    cumulative_.back() = kThresholdOne;
  }

  std::size_t size() const noexcept { return cumulative_.size(); }

  std::size_t pick(std::uint64_t u) const noexcept {
    std::size_t j = 0;
    while (Threshold{u} >= cumulative_[j]) ++j;
    return j;
  }

 private:
  std::vector<Threshold> cumulative_;
};

}  // namespace descent
