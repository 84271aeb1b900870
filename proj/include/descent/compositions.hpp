#pragma once

// Jump words, the discard map, and compositions with bounded parts.
//
// Positions are 1-based throughout: letter p of a word is the jump taken at
// position p, and a part of size a ending at position p covers p-a+1..p.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "descent/random.hpp"
#include "descent/types.hpp"

namespace descent {

struct JumpWord {
  std::vector<int> letters;

  std::size_t size() const noexcept { return letters.size(); }
  friend bool operator==(const JumpWord&, const JumpWord&) = default;
};

struct Composition {
  std::vector<int> parts;
  int s = 2;

  int total() const { return std::accumulate(parts.begin(), parts.end(), 0); }

  /// Position at which each part ends (running prefix sums).
  std::vector<int> ends() const {
    std::vector<int> out;
    out.reserve(parts.size());
    int running = 0;
    for (int a : parts) out.push_back(running += a);
    return out;
  }

  std::string to_string() const {
    std::string out = "(";
    for (std::size_t j = 0; j < parts.size(); ++j) {
      if (j) out += ',';
      out += std::to_string(parts[j]);
    }
    return out + ")";
  }

  friend bool operator==(const Composition& x, const Composition& y) { return x.parts == y.parts; }
};

inline void validate_composition(const Composition& c) {
  if (c.s < 1) throw malformed_word_error("composition maximum part must be at least 1");
  for (int a : c.parts)
    if (a < 1 || a > c.s)
      throw malformed_word_error("part " + std::to_string(a) + " outside 1.." + std::to_string(c.s));
}

/// Reads the word right to left: the letter at the current position is the
/// size of the part ending there, and the letters it covers are discarded.
inline Composition discard_map(const JumpWord& word) {
  if (word.letters.empty()) throw malformed_word_error("empty jump word");
  if (word.letters.front() != 1) throw malformed_word_error("jump word must start with a one-jump");
  int s = 2;
  for (int a : word.letters) {
    if (a < 1) throw malformed_word_error("jump letters must be positive");
    s = std::max(s, a);
  }
  Composition c;
  c.s = s;
  long p = static_cast<long>(word.letters.size());
  while (p > 0) {
    const int a = word.letters[static_cast<std::size_t>(p - 1)];
    if (p - a < 0)
      throw malformed_word_error("letter " + std::to_string(a) + " at position " +
                                 std::to_string(p) + " reaches before the start");
    c.parts.push_back(a);
    p -= a;
  }
  std::reverse(c.parts.begin(), c.parts.end());
  return c;
}

/// All compositions of n with parts in 1..s, lexicographic.
inline std::vector<Composition> enumerate_compositions(int n, int s) {
  if (n < 1) throw domain_error("compositions need n >= 1");
  if (s < 1) throw domain_error("compositions need s >= 1");
  std::vector<Composition> out;
  std::vector<int> parts;
  std::function<void(int)> rec = [&](int left) {
    if (left == 0) {
      out.push_back(Composition{parts, s});
      return;
    }
    for (int a = 1; a <= std::min(s, left); ++a) {
      parts.push_back(a);
      rec(left - a);
      parts.pop_back();
    }
  };
  rec(n);
  return out;
}

/// Per-position jump law. A binary rule gives the two-jump probability q(p);
/// an order-s rule gives weights for part sizes 1..s. At position p only
/// sizes up to p are possible and the weights are renormalized over them
/// (if they carry no mass the jump falls back to size 1).
class JumpRule {
 public:
  using BinaryFn = std::function<Rational(int)>;
  using WeightsFn = std::function<std::vector<Rational>(int)>;

  static JumpRule binary(BinaryFn q) {
    JumpRule r;
    r.s_ = 2;
    r.binary_ = std::move(q);
    return r;
  }

  static JumpRule order_s(int s, WeightsFn weights) {
    if (s < 1) throw invalid_rule_error("rule order must be at least 1");
    JumpRule r;
    r.s_ = s;
    r.weights_ = std::move(weights);
    return r;
  }

  static JumpRule constant(const Rational& q) {
    return binary([q](int) { return q; });
  }

  int order() const noexcept { return s_; }

  /// Raw per-position weights for sizes 1..s, validated.
  std::vector<Rational> raw_weights(int position) const {
    std::vector<Rational> w;
    if (binary_) {
      Rational q = binary_(position);
      q.canonicalize();
      if (sgn(q) < 0 || q > 1)
        throw invalid_rule_error("two-jump probability " + q.get_str() + " at position " +
                                 std::to_string(position) + " is outside [0, 1]");
      w = {1 - q, q};
    } else {
      w = weights_(position);
      for (auto& x : w) x.canonicalize();
      if (static_cast<int>(w.size()) != s_)
        throw invalid_rule_error("rule returned " + std::to_string(w.size()) + " weights, expected " +
                                 std::to_string(s_));
      Rational total = 0;
      for (const auto& x : w) {
        if (sgn(x) < 0) throw invalid_rule_error("negative jump weight at position " + std::to_string(position));
        total += x;
      }
      if (total != 1)
        throw invalid_rule_error("jump weights at position " + std::to_string(position) +
                                 " sum to " + total.get_str());
    }
    return w;
  }

  /// Probabilities of part sizes 1..min(s, position) at this position.
  std::vector<Rational> part_weights(int position) const {
    if (position < 1) throw index_error("positions start at 1");
    const int top = std::min(s_, position);
    if (top == 1) return {Rational(1)};
    std::vector<Rational> w = raw_weights(position);
    w.resize(static_cast<std::size_t>(top));
    Rational mass = std::accumulate(w.begin(), w.end(), Rational(0));
    if (sgn(mass) == 0) {
      std::fill(w.begin(), w.end(), Rational(0));
      w[0] = 1;
      return w;
    }
    if (mass != 1)
      for (auto& x : w) x /= mass;
    return w;
  }

  Rational part_probability(int position, int size) const {
    const auto w = part_weights(position);
    if (size < 1 || size > static_cast<int>(w.size())) return 0;
    return w[static_cast<std::size_t>(size - 1)];
  }

 private:
  JumpRule() = default;
  int s_ = 2;
  BinaryFn binary_;
  WeightsFn weights_;
};

/// Product over parts of the probability of the part's size at its end
/// position. Letters at discarded positions are free and sum out.
inline Rational composition_probability(const JumpRule& rule, const Composition& comp) {
  validate_composition(comp);
  Rational prob = 1;
  int end = 0;
  for (int a : comp.parts) {
    end += a;
    prob *= rule.part_probability(end, a);
    if (sgn(prob) == 0) break;
  }
  return prob;
}

/// Precomputed sampler for words of fixed length under a rule. One 64-bit
/// draw per position from 2 on; thresholds are checked from the largest size
/// down, so an order-2 rule and its binary form consume draws identically.
class WordSampler {
 public:
  WordSampler(const JumpRule& rule, int n) : n_(n) {
    if (n < 1) throw domain_error("words need n >= 1");
    tables_.resize(static_cast<std::size_t>(n) + 1);
    for (int p = 2; p <= n; ++p) {
      auto w = rule.part_weights(p);
      std::reverse(w.begin(), w.end());
      tables_[static_cast<std::size_t>(p)] = CategoricalTable(w);
    }
  }

  int length() const noexcept { return n_; }

  template <class Rng>
  JumpWord operator()(Rng& rng) const {
    JumpWord word;
    word.letters.resize(static_cast<std::size_t>(n_));
    word.letters[0] = 1;
    for (int p = 2; p <= n_; ++p) {
      const auto& t = tables_[static_cast<std::size_t>(p)];
      const auto j = t.pick(rng());
      word.letters[static_cast<std::size_t>(p - 1)] = static_cast<int>(t.size() - j);
    }
    return word;
  }

 private:
  int n_;
  std::vector<CategoricalTable> tables_;
};

template <class Rng>
Composition sample_composition(const JumpRule& rule, int n, Rng& rng) {
  if (rule.order() != 2) throw invalid_rule_error("sample_composition expects an order-2 rule");
  return discard_map(WordSampler(rule, n)(rng));
}

template <class Rng>
Composition higher_order_sample(const JumpRule& rule, int n, Rng& rng) {
  Composition c = discard_map(WordSampler(rule, n)(rng));
  c.s = rule.order();
  return c;
}

/// Binary variable equal to a with probability p and to b otherwise.
struct BernoulliSpec {
  Rational p;
  Rational a;
  Rational b;

  Rational mean() const { return p * a + (1 - p) * b; }
};

inline void validate_spec(const BernoulliSpec& spec) {
  if (sgn(spec.p) < 0 || spec.p > 1)
    throw invalid_rule_error("Bernoulli probability " + spec.p.get_str() + " is outside [0, 1]");
}

/// Sum over the parts of the word's composition: the part of size a ending
/// at position p contributes specs[p-1].a for a two-part, .b otherwise.
inline Rational word_statistic(std::span<const BernoulliSpec> specs, const JumpWord& word) {
  const Composition c = discard_map(word);
  if (specs.size() < word.size())
    throw index_error("need " + std::to_string(word.size()) + " specs, got " +
                      std::to_string(specs.size()));
  Rational total = 0;
  int end = 0;
  for (int a : c.parts) {
    end += a;
    const auto& spec = specs[static_cast<std::size_t>(end - 1)];
    total += a == 2 ? spec.a : spec.b;
  }
  return total;
}

/// Raw moments E[T^0..T^max_order] of a sum of independent Bernoulli specs.
inline std::vector<Rational> binary_sum_moments(std::span<const BernoulliSpec> specs, int max_order) {
  if (max_order > 4)
    throw unsupported_order_error("moments above order 4 are not supported");
  if (max_order < 0) throw unsupported_order_error("negative moment order");
  const auto m = static_cast<std::size_t>(max_order) + 1;
  std::vector<Rational> acc(m, Rational(0));
  acc[0] = 1;
  std::vector<Rational> term(m), next(m);
  for (const auto& spec : specs) {
    validate_spec(spec);
    Rational pa = 1, pb = 1;
    for (std::size_t r = 0; r < m; ++r) {
      term[r] = spec.p * pa + (1 - spec.p) * pb;
      pa *= spec.a;
      pb *= spec.b;
    }
    for (std::size_t r = 0; r < m; ++r) {
      next[r] = 0;
      for (std::size_t j = 0; j <= r; ++j) {
        const Integer c = binomial(r, j);
        next[r] += Rational(c) * acc[j] * term[r - j];
      }
    }
    std::swap(acc, next);
  }
  return acc;
}

/// Specs for the dominating sum U_n = sum_i sqrt(n/i) * |B(1/i, i/2, -1/2)|.
/// The square roots are irrational; each scale factor enters as the exact
/// rational value of its double.
inline std::vector<BernoulliSpec> u_n_specs(int n) {
  if (n < 1) throw domain_error("U_n needs n >= 1");
  std::vector<BernoulliSpec> specs;
  specs.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    const Rational scale(std::sqrt(static_cast<double>(n) / i));
    specs.push_back({make_rational(1, i), scale * make_rational(i, 2), scale * make_rational(1, 2)});
  }
  return specs;
}

}  // namespace descent
